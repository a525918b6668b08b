import os
import sys

# An in-tree build places the package under <build>/python; point
# ASYMCS_PYTHON_PATH there to test it without installing.
_path = os.environ.get("ASYMCS_PYTHON_PATH")
if _path:
    sys.path.insert(0, _path)
