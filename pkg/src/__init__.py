# fama-ic - fluid antenna multiple access interference channel metrics

__version__ = "0.1.0"
