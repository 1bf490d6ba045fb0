from typing import List, Optional

from src.core.agent import Sample
from src.data import DataSource


class PooledDataSource(DataSource):
    """All agents' samples concatenated into one stream: step t is agent t % V of round t // V."""

    def __init__(self, source: DataSource):
        self.source = source
        self.n_agents = 1
        self.dim = source.dim
        self.group_size = source.n_agents
        self._round = None
        self._samples: Optional[List[Sample]] = None

    def sample(self, t: int) -> Optional[List[Sample]]:
        round_index, agent = divmod(t, self.group_size)
        if round_index != self._round:
            self._samples = self.source.sample(round_index)
            self._round = round_index
        if self._samples is None:
            return None
        return [self._samples[agent]]
