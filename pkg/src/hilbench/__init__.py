"""Skills-based agent pipeline and hardware-in-the-loop benchmark harness.

Drives a code-generating model through a manager/coder/assembler pipeline,
packages the output into ready-to-compile firmware projects for three
embedded platform families, runs build/flash/verdict campaigns against
real or stubbed toolchains, and computes outcome and token metrics.
"""

__version__ = "0.1.0"
