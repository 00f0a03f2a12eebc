import sys

from gradvec.cli import main

sys.exit(main())
