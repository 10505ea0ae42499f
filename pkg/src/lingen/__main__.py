import sys

from lingen.cli import main

sys.exit(main())
