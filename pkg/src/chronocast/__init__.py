"""Short-term energy consumption forecasting with hand-written recurrent networks.

Modules: ``data`` (ingestion, features, scaling, windows), ``synth`` (seeded
synthetic dataset), ``nn`` (numerical substrate), ``models`` (LSTM/GRU/FNN),
``arima`` (CSS baseline), ``training``, ``evaluation``, ``benchmark`` and ``cli``.
"""

__version__ = "0.1.0"
