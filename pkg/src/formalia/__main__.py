import sys

from formalia.pipeline.cli import main

sys.exit(main())
