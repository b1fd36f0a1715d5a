import logging
from typing import Callable, Tuple, Union
import numpy as np
from .exc import ConfigError, HistoryDataError


class HistoryBuffer:
    """
    Ring of the last N + 1 states on a delay-aligned grid, dt * N = tau. The
    oldest entry is the state one delay behind the newest, so a delayed
    lookup is always a stored value and never an interpolation.
    """

    def __init__(self, tau: float, n_per_delay: int, samples: np.ndarray, t_head: float = 0.0):
        if n_per_delay < 2:
            raise ConfigError(f'n_per_delay must be at least 2, got {n_per_delay}')
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape[0] != n_per_delay + 1:
            raise ConfigError(f'history needs {n_per_delay + 1} samples, got {samples.shape[0]}')
        if not np.all(np.isfinite(samples)):
            raise HistoryDataError('history contains non-finite samples')

        self.tau = tau
        self.n_per_delay = n_per_delay
        self.dt = tau / n_per_delay
        self.t_head = t_head
        self.ring = samples.copy()
        self._oldest = 0

    @property
    def dim(self) -> int:
        return self.ring.shape[1]

    def __len__(self):
        return self.ring.shape[0]

    def delayed_value(self, offset: int = 0) -> np.ndarray:
        """State at t_head - tau + offset * dt"""
        return self.ring[(self._oldest + offset) % len(self)]

    def delayed_pair(self) -> Tuple[np.ndarray, np.ndarray]:
        """Delayed image of the step [t_head, t_head + dt]"""
        return self.delayed_value(0), self.delayed_value(1)

    @property
    def head(self) -> np.ndarray:
        return self.delayed_value(self.n_per_delay)

    def set_head(self, state: np.ndarray):
        """Overwrite the newest entry, e.g. with a post-impulse state"""
        self.ring[(self._oldest + self.n_per_delay) % len(self)] = state

    def push(self, state: np.ndarray):
        self.ring[self._oldest] = state
        self._oldest = (self._oldest + 1) % len(self)
        self.t_head += self.dt

    def window(self) -> np.ndarray:
        """Stored states ordered oldest to newest"""
        return np.roll(self.ring, -self._oldest, axis=0)


Sampler = Callable[[float], Union[float, np.ndarray]]


def make_history_buffer(tau: float, n_per_delay: int, initial_history: Sampler) -> HistoryBuffer:
    """Fill a buffer with the prescribed history at t = -tau, -tau + dt, ..., 0"""
    if n_per_delay < 2:
        raise ConfigError(f'n_per_delay must be at least 2, got {n_per_delay}')
    dt = tau / n_per_delay
    samples = [np.atleast_1d(np.asarray(initial_history((i - n_per_delay) * dt), dtype=float))
               for i in range(n_per_delay + 1)]
    logging.debug(f'history buffer: {n_per_delay + 1} samples of size {samples[0].size}')
    return HistoryBuffer(tau, n_per_delay, np.stack(samples), t_head=0.0)
