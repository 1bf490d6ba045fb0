from abc import ABC, abstractmethod
from typing import List, Optional

from src.core.agent import Sample


class DataSource(ABC):
    """Yields one sample per agent per round."""

    n_agents: int
    dim: int

    @abstractmethod
    def sample(self, t: int) -> Optional[List[Sample]]:
        """Samples (x_{i,t}, y_{i,t}) for every agent, or None once the data is exhausted."""
        pass
