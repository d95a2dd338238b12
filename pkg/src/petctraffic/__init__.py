"""Finite-state traffic models for linear periodic event-triggered control.

Builds exact finite abstractions of the sampling traffic generated by a
linear PETC loop (bisimilar for the mixed PETC/periodic strategy,
simulating for plain PETC) and derives certified bounds on the average
triggering frequency and the exponential decay rate.  All feasibility
answers are backed by exact rational witnesses.
"""

__version__ = "0.1.0"
