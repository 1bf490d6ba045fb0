from abc import ABC, abstractmethod
from typing import Dict, Type

import numpy as np

from src.core.exceptions import ArgumentError
from src.core.models import LossFamily, LossSpec, ProximityFamily, ProximitySpec


class LossFunction(ABC):
    def __init__(self, spec: LossSpec):
        self.spec = spec

    @abstractmethod
    def value(self, prediction: float, target: float) -> float:
        pass

    @abstractmethod
    def derivative(self, prediction: float, target: float) -> float:
        """Derivative with respect to the prediction."""
        pass


class SquaredErrorLoss(LossFunction):
    def value(self, prediction: float, target: float) -> float:
        return 0.5 * (target - prediction) ** 2

    def derivative(self, prediction: float, target: float) -> float:
        return prediction - target


class HuberLoss(LossFunction):
    def value(self, prediction: float, target: float) -> float:
        phi = self.spec.threshold
        residual = abs(target - prediction)
        if residual <= phi:
            return 0.5 * residual ** 2
        return phi * residual - 0.5 * phi ** 2

    def derivative(self, prediction: float, target: float) -> float:
        phi = self.spec.threshold
        residual = target - prediction
        # at |residual| == phi the quadratic branch gives -residual = -/+ phi
        if abs(residual) <= phi:
            return -residual
        return -phi * float(np.sign(residual))


class ProximityFunction(ABC):
    def __init__(self, spec: ProximitySpec):
        self.spec = spec

    @abstractmethod
    def value(self, zi: float, zj: float) -> float:
        pass

    @abstractmethod
    def derivative_first(self, zi: float, zj: float) -> float:
        pass


class AbsoluteDifference(ProximityFunction):
    def value(self, zi: float, zj: float) -> float:
        return abs(zi - zj)

    def derivative_first(self, zi: float, zj: float) -> float:
        return float(np.sign(zi - zj))  # subgradient 0 at a tie


class SquaredDifference(ProximityFunction):
    def value(self, zi: float, zj: float) -> float:
        return (zi - zj) ** 2

    def derivative_first(self, zi: float, zj: float) -> float:
        return 2.0 * (zi - zj)


_LOSSES: Dict[LossFamily, Type[LossFunction]] = {
    LossFamily.SQUARED_ERROR: SquaredErrorLoss,
    LossFamily.HUBER: HuberLoss,
}

_PROXIMITIES: Dict[ProximityFamily, Type[ProximityFunction]] = {
    ProximityFamily.ABSOLUTE_DIFFERENCE: AbsoluteDifference,
    ProximityFamily.SQUARED_DIFFERENCE: SquaredDifference,
}


def get_loss(spec: LossSpec) -> LossFunction:
    if spec.family not in _LOSSES:
        raise ArgumentError(f"Loss family '{spec.family}' not supported")
    return _LOSSES[spec.family](spec)


def get_proximity(spec: ProximitySpec) -> ProximityFunction:
    if spec.family not in _PROXIMITIES:
        raise ArgumentError(f"Proximity family '{spec.family}' not supported")
    return _PROXIMITIES[spec.family](spec)


def loss(spec: LossSpec, prediction: float, target: float) -> float:
    return get_loss(spec).value(prediction, target)


def loss_deriv(spec: LossSpec, prediction: float, target: float) -> float:
    return get_loss(spec).derivative(prediction, target)


def proximity(spec: ProximitySpec, zi: float, zj: float) -> float:
    return get_proximity(spec).value(zi, zj)


def proximity_deriv_first(spec: ProximitySpec, zi: float, zj: float) -> float:
    return get_proximity(spec).derivative_first(zi, zj)
