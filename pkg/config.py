"""
Configuration management for whgrav
Loads numerical and service settings from environment variables
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Application configuration"""

    # Service Configuration
    SECRET_KEY = os.getenv('SECRET_KEY', 'dev-secret-key-change-in-production')
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
    HOST = os.getenv('HOST', '0.0.0.0')
    PORT = int(os.getenv('PORT', 5001))

    # Quadrature Configuration
    NODE_COUNT = int(os.getenv('WHGRAV_NODES', 256))
    MAX_NODE_COUNT = int(os.getenv('WHGRAV_MAX_NODES', 4096))
    MIN_NODE_COUNT = 8

    # Tolerances
    GEOMETRY_TOL = float(os.getenv('WHGRAV_GEOMETRY_TOL', 1e-9))  # relative to max|tau_k|
    BRANCH_TOL = float(os.getenv('WHGRAV_BRANCH_TOL', 1e-12))
    ZERO_TOL = float(os.getenv('WHGRAV_ZERO_TOL', 1e-13))  # relative to max|f|
    REALNESS_TOL = float(os.getenv('WHGRAV_REALNESS_TOL', 1e-10))
    CHECK_TOL = float(os.getenv('WHGRAV_CHECK_TOL', 1e-6))
    SYMMETRY_TOL = float(os.getenv('WHGRAV_SYMMETRY_TOL', 1e-8))

    # Finite-difference Configuration
    STENCIL_STEP = float(os.getenv('WHGRAV_STENCIL_STEP', 1e-2))

    # Node spacings kept between the contour and singular roots in derivative quadratures
    SINGULARITY_CLEARANCE = float(os.getenv('WHGRAV_SINGULARITY_CLEARANCE', 4.0))
    TAYLOR_RADIUS_FRACTION = float(os.getenv('WHGRAV_TAYLOR_RADIUS', 0.5))
    TAYLOR_POINTS = int(os.getenv('WHGRAV_TAYLOR_POINTS', 64))

    # Parallelism
    THREADS = max(1, int(os.getenv('WHGRAV_THREADS', os.cpu_count() or 1)))

    # Logging
    CONSOLE_LOG_LEVEL = os.getenv('CONSOLE_LOG_LEVEL', 'WARNING').upper()

    # Storage Configuration
    RESULTS_DIR = os.getenv('RESULTS_DIR', 'results')
    LOGS_DIR = os.getenv('LOGS_DIR', 'logs')

    # Database Configuration
    DATABASE_URL = os.getenv('DATABASE_URL')

    @classmethod
    def get_database_url(cls):
        """
        Get database URL, normalizing the legacy postgres:// scheme
        """
        url = cls.DATABASE_URL
        if not url:
            return None
        if url.startswith('postgres://'):
            url = 'postgresql://' + url[len('postgres://'):]
        return url

    @classmethod
    def ensure_directories(cls):
        """Ensure all required directories exist"""
        directories = [
            cls.RESULTS_DIR,
            cls.LOGS_DIR,
        ]
        for directory in directories:
            os.makedirs(directory, exist_ok=True)
