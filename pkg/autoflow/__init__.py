"""
Autoflow: grammar-guided workflow composition for Django

Evolves machine-learning workflows (preprocessing sequence + classifier +
hyper-parameters) for tabular classification data and returns a
prediction-diverse weighted ensemble of the best ones.
"""

__version__ = "0.1.0"

default_app_config = 'autoflow.apps.AutoflowConfig'
