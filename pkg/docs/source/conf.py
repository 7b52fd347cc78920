# -*- coding: utf-8 -*-
#
# gfmlab documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
sys.path.insert(0, os.path.abspath('../../'))


# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
    'sphinx.ext.githubpages']

templates_path = ['_templates']

source_suffix = ['.rst', '.md']

master_doc = 'index'

project = 'gfmlab'
copyright = '2026, the gfmlab developers'
author = 'the gfmlab developers'

version = '0.3'
release = '0.3.1'

language = None

exclude_patterns = []

pygments_style = 'sphinx'

todo_include_todos = False


# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_static_path = ['_static']


# -- Options for HTMLHelp output ------------------------------------------

htmlhelp_basename = 'gfmlabdoc'


# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
    (master_doc, 'gfmlab.tex', 'gfmlab Documentation',
     author, 'manual'),
]


# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'gfmlab', 'gfmlab Documentation',
     [author], 1)
]


# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (master_doc, 'gfmlab', 'gfmlab Documentation',
     author, 'gfmlab', 'Desk-scale extraction of graph foundation models.',
     'Miscellaneous'),
]
