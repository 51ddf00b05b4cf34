"""Operators with a right-hand side."""

from __future__ import annotations

from dataclasses import dataclass, field

from .constants import CE, ConstantExpr, ZERO
from .ore import OreOperator, render


@dataclass(frozen=True)
class InhomogeneousRelation:
    """``op f = rhs`` where rhs is a constant expression in the operator's variable."""

    op: OreOperator
    rhs: ConstantExpr = field(default=ZERO)

    @property
    def homogeneous(self) -> bool:
        return self.rhs.is_zero()

    def rhs_at(self, value) -> ConstantExpr:
        return self.rhs.subs({self.op.var: value})

    def residual(self, seq, start: int = 0):
        """op applied to a value list minus the right side, index by index."""
        from .ore import apply_to_sequence
        vals = apply_to_sequence(self.op, seq, start=start)
        return [v - self.rhs_at(start + i) for i, v in enumerate(vals)]

    def render(self) -> str:
        return f"{render(self.op)} = {self.rhs}"

    def __str__(self):
        return self.render()


def relation(op: OreOperator, rhs=None) -> InhomogeneousRelation:
    return InhomogeneousRelation(op, ZERO if rhs is None else CE.coerce(rhs))
