import sys

from rsgsim.cli import main

sys.exit(main())
