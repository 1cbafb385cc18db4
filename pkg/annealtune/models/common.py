"""Common base models."""

from pydantic import BaseModel as PydanticBaseModel, ConfigDict


class BaseModel(PydanticBaseModel):
    """Base model with common configuration."""

    model_config = ConfigDict(
        # Allow population by field name and alias
        populate_by_name=True,
        # Use enum values instead of names
        use_enum_values=True,
        # Validate assignment
        validate_assignment=True,
        # Forbid extra fields
        extra="forbid",
    )


class FrozenModel(BaseModel):
    """Immutable, hashable variant used for value-like configuration."""

    model_config = ConfigDict(
        populate_by_name=True,
        use_enum_values=True,
        extra="forbid",
        frozen=True,
    )
