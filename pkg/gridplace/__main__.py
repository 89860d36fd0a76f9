import sys

from gridplace.main import main

sys.exit(main())
