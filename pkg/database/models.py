"""
Database models for storing verification runs
"""
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, JSON, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from config import Config
from utils.logger import setup_logger

logger = setup_logger(__name__)

Base = declarative_base()


class VerificationRun(Base):
    """Store one verification (or factorization) run started over HTTP"""
    __tablename__ = 'verification_runs'

    task_id = Column(String(100), primary_key=True)
    command = Column(String(50))
    preset = Column(String(100), nullable=True)
    status = Column(String(50))  # pending, running, completed, failed

    # Run configuration
    configuration = Column(JSON)

    # Results
    report = Column(JSON)
    error = Column(Text, nullable=True)

    # Summary
    total_checks = Column(Integer, default=0)
    passed_checks = Column(Integer, default=0)
    failed_checks = Column(Integer, default=0)
    max_residual = Column(Float, nullable=True)

    # Timestamps
    created_at = Column(DateTime, default=datetime.utcnow)
    updated_at = Column(DateTime, default=datetime.utcnow, onupdate=datetime.utcnow)

    def to_dict(self):
        """Convert to dictionary"""
        return {
            'task_id': self.task_id,
            'command': self.command,
            'preset': self.preset,
            'status': self.status,
            'configuration': self.configuration,
            'report': self.report,
            'error': self.error,
            'total_checks': self.total_checks,
            'passed_checks': self.passed_checks,
            'failed_checks': self.failed_checks,
            'max_residual': self.max_residual,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'updated_at': self.updated_at.isoformat() if self.updated_at else None,
        }


# Database connection
DATABASE_URL = Config.get_database_url()

if DATABASE_URL:
    engine = create_engine(DATABASE_URL)
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

    def init_db():
        """Initialize database tables"""
        Base.metadata.create_all(bind=engine)
else:
    engine = None
    SessionLocal = None

    def init_db():
        logger.warning("DATABASE_URL not set. Database features disabled.")
