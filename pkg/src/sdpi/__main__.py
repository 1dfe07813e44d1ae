import sys

from sdpi.cli import main

sys.exit(main())
