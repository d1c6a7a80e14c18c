# single source of truth for package version,
# see https://packaging.python.org/en/latest/single_source_version/
__version__ = "0.3.0"

# app name recorded in report metadata
app_name = "maxconv v{}".format(__version__)
