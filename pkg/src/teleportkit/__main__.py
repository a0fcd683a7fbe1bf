import sys

from teleportkit.cli import main

sys.exit(main())
