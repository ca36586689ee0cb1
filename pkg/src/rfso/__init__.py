"""rfso: outage and sum-rate evaluation for interference-limited mixed RF/FSO
two-way relay links.

Subpackages
-----------
specfun   complex log-gamma, regularized incomplete gamma, Meijer-G and
          bivariate Fox-H evaluation by Mellin-Barnes contour integration
channels  best-of-K Nakagami RF link, double-generalized-gamma FSO link with
          pointing errors, aggregate Nakagami interference
metrics   exact / asymptotic / quadrature outage probability and achievable
          sum rate
mc        seeded Monte-Carlo estimators
cli       configuration-driven sweep runner and validation report
"""

__version__ = "0.1.0"
