import sys

from setguard.cli import main

sys.exit(main())
