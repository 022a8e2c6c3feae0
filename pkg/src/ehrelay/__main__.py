import sys

from ehrelay.cli import main

sys.exit(main())
