"""EEG-to-trajectory decoding toolkit.

Signal preprocessing, lag-embedded feature construction, linear and neural
decoders with a self-contained autodiff core, and an experiment harness,
all on plain numpy arrays with optional jit-compiled kernels.
"""

__version__ = "0.1.0"
