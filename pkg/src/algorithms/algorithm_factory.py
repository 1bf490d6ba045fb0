from typing import Dict, Type

from src.algorithms import LearningAlgorithm
from src.algorithms.halk import HalkAlgorithm
from src.algorithms.linear import LinearAlgorithm
from src.algorithms.penalty import PenaltyAlgorithm
from src.algorithms.rbf import RbfAlgorithm
from src.core.exceptions import ArgumentError
from src.core.models import HyperParams, KernelSpec, LossSpec, Method, ProximitySpec


class AlgorithmFactory:
    _algorithms: Dict[Method, Type[LearningAlgorithm]] = {
        Method.HALK: HalkAlgorithm,
        Method.PENALTY: PenaltyAlgorithm,
        Method.RBF: RbfAlgorithm,
        # one agent over the pooled stream; pooling is done by the data source
        Method.CENTRALIZED: HalkAlgorithm,
        Method.LINEAR: LinearAlgorithm,
    }

    @classmethod
    def get_algorithm(cls, method: Method, hp: HyperParams, spec: KernelSpec, loss: LossSpec,
                      prox: ProximitySpec, **params) -> LearningAlgorithm:
        """
        Factory method to get the update rule of a learning method
        """
        if method not in cls._algorithms:
            raise ArgumentError(f"Method '{method}' not supported")

        algorithm_class = cls._algorithms[method]
        return algorithm_class(hp, spec, loss, prox, **params)
