import sys

from ngramatch.cli import main

sys.exit(main())
