import os
import sys

# ctest points this at the package staged in the build tree; prefer it over any installed copy.
_staged = os.environ.get("TRPKGC_STAGED_SITE")
if _staged:
    sys.meta_path[:] = [f for f in sys.meta_path if not type(f).__module__.startswith("_editable_skbc_")]
    sys.path.insert(0, _staged)
    sys.modules.pop("trpkgc", None)
