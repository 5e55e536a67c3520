"""Build script: compiles the Cython Monte Carlo kernel when possible.

The extension is optional.  If Cython or a C compiler is unavailable the
package falls back to the vectorized numpy kernel at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/fracwalk/_kernels/_corekern.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [np.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
except Exception as exc:  # pragma: no cover - best-effort build
    print(f"fracwalk: skipping compiled kernel ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
