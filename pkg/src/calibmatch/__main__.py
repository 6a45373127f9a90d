import sys

from calibmatch.cli import main

sys.exit(main())
