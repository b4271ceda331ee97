import os

from setuptools import setup

# The analysis core is plain Python; when Cython is available it is compiled
# for speed. Set MINIJ_NULL_PURE=1 to install the interpreted modules only.
CORE = [
    "src/minij_null/semantics/nullness.py",
    "src/minij_null/semantics/program.py",
    "src/minij_null/dataflow/paths.py",
    "src/minij_null/dataflow/cfg.py",
    "src/minij_null/dataflow/analysis.py",
    "src/minij_null/dataflow/jarinfer.py",
    "src/minij_null/boundary.py",
    "src/minij_null/handlers.py",
    "src/minij_null/checks.py",
    "src/minij_null/initcheck.py",
]


def extensions():
    if os.environ.get("MINIJ_NULL_PURE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(CORE, compiler_directives={"language_level": 3, "binding": True}, quiet=True)


setup(ext_modules=extensions())
