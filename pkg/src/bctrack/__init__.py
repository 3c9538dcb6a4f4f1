"""Fault-tolerant bipartite consensus tracking for stochastic multi-agent systems."""
