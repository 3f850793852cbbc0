"""Bridge corridor decision support system.

Pipeline: simulate a scenario grid on a cell-transmission corridor, label each
scenario with the objective-minimizing control action, extract fuzzy if-then
rules from the labeled runs, generalize the rules with a suite of supervised
and unsupervised learners, and serve trained-model recommendations to a live
operator session.
"""

__version__ = "0.1.0"

ARTIFACT_VERSION = 1
