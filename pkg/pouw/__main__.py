"""Allow running pouw as `python -m pouw`."""

import sys

from pouw.cli import main

sys.exit(main())
