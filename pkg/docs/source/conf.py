# -*- coding: utf-8 -*-
#
# fbmdensity documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
]

templates_path = ['.templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'fbmdensity'
copyright = 'fbmdensity contributors'
author = 'fbmdensity contributors'
version = '0.1'
release = '0.1.0'

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = False

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'fbmdensitydoc'

latex_documents = [
    (master_doc, 'fbmdensity.tex', 'fbmdensity Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'fbmdensity', 'fbmdensity Documentation', [author], 1)
]
