"""Utilities for validating documents against the schemas of maxconv reports"""
from typing import Type, Union

from jsonschema import Draft202012Validator

from maxconv.models import ReportModel


def report_schema(model: Type[ReportModel]) -> dict:
    """JSON schema of a report as it is written by :meth:`ReportModel.to_dict`"""
    return model.model_json_schema(mode='serialization')


def validate_report(document: Union[dict, ReportModel], model: Type[ReportModel]):
    """Validate a report document against the schema of its model

    Args:
        document: Document to be validated
        model: Report class the document should describe
    Raises:
        (jsonschema.ValidationError) If the document does not match the schema
    """

    # Convert to dictionary, if needed
    if isinstance(document, ReportModel):
        document = document.to_dict()

    validator = Draft202012Validator(report_schema(model))
    validator.validate(document)
