import sys

from phadamard.cli import main

sys.exit(main())
