import sys

from semirps.cli import main

sys.exit(main())
