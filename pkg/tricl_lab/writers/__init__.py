"""写入器"""
from .base import BaseWriter
from .json_writer import JsonWriter
from .csv_writer import CsvWriter
from .report_writer import ReportWriter

__all__ = ['BaseWriter', 'JsonWriter', 'CsvWriter', 'ReportWriter']
