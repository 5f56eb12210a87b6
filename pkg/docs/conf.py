# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

# -- Project information -----------------------------------------------------

project = 'pytwocomp'
copyright = "2026, the pytwocomp developers"
author = 'the pytwocomp developers'

version = '0.1'
release = '0.1.0'

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
]

templates_path = ['_templates']
autoclass_content = 'both'
source_suffix = '.rst'
master_doc = 'index'
language = None
exclude_patterns = ['api.rst', 'quickstart.rst', '_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_options = {
    'collapse_navigation': True,
}
html_static_path = ['_static']
htmlhelp_basename = 'pytwocompdoc'

# -- Options for other output ------------------------------------------------

latex_documents = [
    (master_doc, 'pytwocomp.tex', 'pytwocomp Documentation', 'pytwocomp', 'manual'),
]
man_pages = [
    (master_doc, 'pytwocomp', 'pytwocomp Documentation', [author], 1)
]
texinfo_documents = [
    (master_doc, 'pytwocomp', 'pytwocomp Documentation', author, 'pytwocomp',
     'Harmonic analysis of two-component continuum particle systems.', 'Miscellaneous'),
]
