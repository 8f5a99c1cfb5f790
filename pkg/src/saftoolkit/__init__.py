"""SAF Toolkit: modeling, validation, KPI monitoring and rendering for
sustainability-aware software architectures."""

__version__ = "0.1.0"
