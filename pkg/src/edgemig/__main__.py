import sys

from edgemig.cli import main

sys.exit(main())
