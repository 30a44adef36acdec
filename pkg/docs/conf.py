# Configuration file for the Sphinx documentation builder.
#
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys

sys.path.insert(0, os.path.abspath("../"))


# -- Project information -----------------------------------------------------
project = 'codedmr'
copyright = '2026, codedmr Developers'
author = 'codedmr Developers'

# The master toctree document.
master_doc = 'index'


# -- General configuration ---------------------------------------------------
autodoc_mock_imports = ["joblib",
                        "torch",
                        "click"]

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx_copybutton',
]

# numpydoc docstrings only
napoleon_google_docstring = False
napoleon_include_init_with_doc = True
napoleon_use_rtype = True

autodoc_default_options = {
    "members": True,
    "inherited-members": False,
    "show-inheritance": False,
    "member-order": "bysource"
}

exclude_patterns = []

pygments_style = "default"

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_sidebars = {
  '**': ['globaltoc.html', 'searchbox.html']
}
