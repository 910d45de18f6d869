"""
Common schema building blocks used across the package.
"""
import enum

from pydantic import BaseModel, ConfigDict


class ArrayModel(BaseModel):
    """
    Base for immutable records that carry numpy arrays.

    Arrays are accepted as-is (no coercion); validators on subclasses check
    shapes and value ranges.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class TrackLabel(str, enum.Enum):
    """Behavior label of a track or clip."""

    STARTLE = "startle"
    NON_STARTLE = "non-startle"

    @classmethod
    def from_flag(cls, flag: int) -> "TrackLabel":
        """Map a 0/1 ground-truth flag onto a label."""
        return cls.STARTLE if flag else cls.NON_STARTLE
