import sys

from seamtrack.cli import main

sys.exit(main())
