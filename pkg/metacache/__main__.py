import sys

from metacache.cli import main

sys.exit(main())
