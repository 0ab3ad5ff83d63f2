"""Stored verification runs"""
from database.models import VerificationRun, init_db
from database.service import DatabaseService

__all__ = ['VerificationRun', 'init_db', 'DatabaseService']
