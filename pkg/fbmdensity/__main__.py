import sys

from fbmdensity.cli import main

sys.exit(main())
