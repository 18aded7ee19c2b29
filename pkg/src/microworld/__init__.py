"""Deterministic fire and ant-colony micro-worlds.

Headless runs, parameter sweeps, behavior-variant menus, replayable command
logs, and a lockstep session server where each participant steers one agent.
"""

__version__ = "0.1.0"
