"""Score report of an Inception Score evaluation."""

from typing import List

from pydantic import BaseModel, Field


class ScoreReport(BaseModel):
    """Per-split scores with their mean and population standard deviation."""

    split_scores: List[float]
    mean: float
    std: float
    n: int = Field(gt=0)
    k: int = Field(gt=0)
    splits: int = Field(ge=1)

    def to_csv(self) -> str:
        """`split,score` rows followed by a `mean,std` trailer."""
        lines = ["split,score"]
        lines.extend(f"{index},{score:.6f}" for index, score in enumerate(self.split_scores))
        lines.append("mean,std")
        lines.append(f"{self.mean:.6f},{self.std:.6f}")
        return "\n".join(lines) + "\n"
