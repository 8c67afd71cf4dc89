import sys

from predspec.cli import main

sys.exit(main())
