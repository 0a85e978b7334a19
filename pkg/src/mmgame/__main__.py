import sys
from mmgame.cli import main

sys.exit(main())
