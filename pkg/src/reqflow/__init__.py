"""Requirements-driven verification flow toolkit.

Parses IP configurations, derives configuration-specific requirement/testcase
subsets from a reviewed superset, builds a verification plan, runs a
deterministic regression against a configurable memory-subsystem model, and
reports results back into the requirements store.
"""

__version__ = "0.1.0"
