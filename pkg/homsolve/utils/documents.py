import json
import logging
from pathlib import Path
from typing import Any, Type, TypeVar, Union

from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from homsolve.dependencies.error_code import ErrorCode, ValidationError
from homsolve.schemas.instance import InitDoc

logger = logging.getLogger(__name__)

DocT = TypeVar("DocT", bound=BaseModel)


def _read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file", code=ErrorCode.FILE_NOT_FOUND, details={"path": str(path)})
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"{path}: invalid JSON ({e.msg} at line {e.lineno})",
            code=ErrorCode.MALFORMED_DOCUMENT,
            details={"path": str(path)},
        )


def _validate(model: Type[DocT], data: Any, source: str) -> DocT:
    try:
        return model.model_validate(data)
    except PydanticValidationError as e:
        errors = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ValidationError(
            f"{source}: " + "; ".join(errors),
            code=ErrorCode.MALFORMED_DOCUMENT,
            details={"errors": errors},
        )


def load_document(path: Union[str, Path], model: Type[DocT]) -> DocT:
    """Read and validate a JSON document; every failure surfaces as an input error."""
    doc = _validate(model, _read_json(path), str(path))
    logger.debug(f"Loaded {model.__name__} from {path}")
    return doc


def load_init(path: Union[str, Path]) -> InitDoc:
    """Initial data as ``{"z0": [...]}`` or a bare list of scalars."""
    data = _read_json(path)
    if isinstance(data, list):
        data = {"z0": data}
    return _validate(InitDoc, data, str(path))


def dump_document(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def save_document(path: Union[str, Path], doc: BaseModel) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(doc), encoding="utf-8")
    logger.debug(f"Wrote {type(doc).__name__} to {path}")
