"""Records produced by maxconv: verification verdicts, certified brackets and rate reports"""
import json
from pathlib import Path
from typing import Optional, Type, TypeVar, Union

from pydantic import BaseModel, Field

from maxconv.version import __version__

R = TypeVar('R', bound='ReportModel')


class ReportModel(BaseModel):
    """Base class for the top-level reports written to disk

    Reports are rendered with :meth:`to_dict` / :meth:`to_json` and read back with
    :meth:`from_dict` / :meth:`from_json`. Loading validates the document against the JSON
    schema of the model before building it, so a hand-edited file fails with a
    :class:`jsonschema.ValidationError` that points at the offending field.
    """

    version: str = Field(__version__, description="Version of maxconv that produced this report")

    def to_dict(self) -> dict:
        """Render the report to a JSON-ready dictionary"""
        return self.model_dump(mode='json')

    def to_json(self, path: Optional[Union[str, Path]] = None, indent: int = 2) -> str:
        """Render the report as JSON

        Args:
            path: If provided, also write the document to this file
            indent: Indentation of the output
        Returns:
            (str) The JSON document
        """
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            Path(path).write_text(text + '\n')
        return text

    @classmethod
    def from_dict(cls: Type[R], document: dict) -> R:
        """Validate a dictionary against the report schema and build the report"""
        from maxconv.utils.schemas import validate_report
        validate_report(document, cls)
        return cls.model_validate(document)

    @classmethod
    def from_json(cls: Type[R], path: Union[str, Path]) -> R:
        """Read a report written by :meth:`to_json`"""
        with open(path) as fp:
            return cls.from_dict(json.load(fp))
