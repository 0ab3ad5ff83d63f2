"""
Database service for persisting verification runs
"""
from datetime import datetime

from database import models
from database.models import VerificationRun, init_db
from utils.logger import setup_logger

logger = setup_logger(__name__)


class DatabaseService:
    """Service for database operations"""

    @staticmethod
    def save_run(task_id, command, preset, configuration):
        """Save a new run in pending state"""
        if not models.SessionLocal:
            logger.warning("Database not configured. Skipping save.")
            return None

        db = models.SessionLocal()
        try:
            run = VerificationRun(
                task_id=task_id,
                command=command,
                preset=preset,
                status='pending',
                configuration=configuration,
                created_at=datetime.utcnow()
            )
            db.add(run)
            db.commit()
            db.refresh(run)

            logger.info(f"Saved verification run: {task_id}")
            return run.to_dict()

        except Exception as e:
            logger.error(f"Error saving verification run: {str(e)}")
            db.rollback()
            return None
        finally:
            db.close()

    @staticmethod
    def update_run(task_id, status, report=None, error=None):
        """Update run status and, when given, its report summary"""
        if not models.SessionLocal:
            return None

        db = models.SessionLocal()
        try:
            run = db.query(VerificationRun).filter(VerificationRun.task_id == task_id).first()
            if not run:
                return None

            run.status = status
            run.updated_at = datetime.utcnow()

            if report:
                run.report = report
                summary = report.get('summary', {})
                run.total_checks = summary.get('total', 0)
                run.passed_checks = summary.get('passed', 0)
                run.failed_checks = summary.get('failed', 0)
                run.max_residual = summary.get('max_residual')

            if error:
                run.error = str(error)

            db.commit()
            db.refresh(run)

            logger.info(f"Updated verification run: {task_id} -> {status}")
            return run.to_dict()

        except Exception as e:
            logger.error(f"Error updating verification run: {str(e)}")
            db.rollback()
            return None
        finally:
            db.close()

    @staticmethod
    def get_run(task_id):
        """Get run by task_id"""
        if not models.SessionLocal:
            return None

        db = models.SessionLocal()
        try:
            run = db.query(VerificationRun).filter(VerificationRun.task_id == task_id).first()
            return run.to_dict() if run else None

        except Exception as e:
            logger.error(f"Error getting verification run: {str(e)}")
            return None
        finally:
            db.close()

    @staticmethod
    def list_runs(limit=50):
        """Most recent runs first"""
        if not models.SessionLocal:
            return []

        db = models.SessionLocal()
        try:
            runs = db.query(VerificationRun).order_by(VerificationRun.created_at.desc()).limit(limit).all()
            return [run.to_dict() for run in runs]

        except Exception as e:
            logger.error(f"Error listing verification runs: {str(e)}")
            return []
        finally:
            db.close()


# Initialize database on import
try:
    init_db()
except Exception as e:
    logger.error(f"Failed to initialize database: {str(e)}")
