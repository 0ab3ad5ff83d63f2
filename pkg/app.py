"""
Flask API for Wiener-Hopf solutions and their verification
"""
import threading
from typing import Any, Dict

from flask import Flask, jsonify, request
from flask_cors import CORS
from flasgger import Swagger

from config import Config
from database.service import DatabaseService
from solutions.pipeline import RunConfig, run_factorize, run_metric, run_verify
from utils.errors import WHGravError
from utils.logger import setup_logger
from utils.task_manager import TaskStatus, task_manager

# Initialize Flask app
app = Flask(__name__)
CORS(app)


# Swagger configuration
swagger_config = {
    "headers": [],
    "specs": [
        {
            "endpoint": 'apispec',
            "route": '/apispec.json',
            "rule_filter": lambda rule: True,
            "model_filter": lambda tag: True,
        }
    ],
    "static_url_path": "/flasgger_static",
    "swagger_ui": True,
    "specs_route": "/api/docs"
}

swagger_template = {
    "swagger": "2.0",
    "info": {
        "title": "whgrav API",
        "description": "Canonical Wiener-Hopf factorization of diagonal monodromies, "
                       "metric reconstruction and residual verification",
        "version": "1.0.0"
    },
    "basePath": "/",
    "schemes": ["http", "https"],
    "tags": [
        {
            "name": "Health",
            "description": "Health check endpoints"
        },
        {
            "name": "Solutions",
            "description": "Factorization and metric data"
        },
        {
            "name": "Verification",
            "description": "Asynchronous verification runs"
        }
    ]
}

# Initialize Swagger
swagger = Swagger(app, config=swagger_config, template=swagger_template)

# Setup logger
logger = setup_logger(__name__)

# Ensure directories exist
Config.ensure_directories()


def _error_response(error: WHGravError):
    logger.error(f"{type(error).__name__}: {error.message}")
    return jsonify({
        'success': False,
        'error': error.to_dict()
    }), error.http_status


def _run_config(command: str) -> RunConfig:
    data: Dict[str, Any] = request.get_json(silent=True) or {}
    data = {k: v for k, v in data.items() if k not in ('command', 'out')}
    return RunConfig.from_dict({**data, 'command': command}).validate()


@app.route('/', methods=['GET'])
def health_check():
    """Health check endpoint
    ---
    tags:
      - Health
    responses:
      200:
        description: API is healthy
    """
    return jsonify({
        'status': 'healthy',
        'service': 'whgrav',
        'version': '1.0.0'
    }), 200


@app.route('/api/factorize', methods=['POST'])
def factorize():
    """
    Canonical (optionally deformed) factorization on a grid
    ---
    tags:
      - Solutions
    parameters:
      - in: body
        name: body
        schema:
          type: object
          example: {"preset": "einstein_rosen", "k": 1, "a": 1, "b": 1.359140914, "grid": "0.5:1.5:11,-0.5:0.5:11"}
    responses:
      200:
        description: Solution document
      400:
        description: Invalid configuration
      422:
        description: Precondition violated (winding index, contour, branch point)
    """
    try:
        config = _run_config('factorize')
        logger.info(f"Factorizing {config.preset or 'custom monodromy'} on grid {config.grid}")
        return jsonify({
            'success': True,
            'solution': run_factorize(config)
        }), 200

    except WHGravError as e:
        return _error_response(e)
    except Exception as e:
        logger.error(f"Error in factorize: {str(e)}")
        return jsonify({
            'success': False,
            'error': str(e)
        }), 500


@app.route('/api/metric', methods=['POST'])
def metric():
    """
    Delta, B and psi on a grid
    ---
    tags:
      - Solutions
    parameters:
      - in: body
        name: body
        schema:
          type: object
          example: {"preset": "pulse", "a": 1, "b": 1, "grid": "0.5:1.5:11,0.1:1.1:11"}
    responses:
      200:
        description: CSV table and summary
    """
    try:
        config = _run_config('metric')
        data, summary = run_metric(config)
        return jsonify({
            'success': True,
            'summary': summary,
            'csv': data.to_csv()
        }), 200

    except WHGravError as e:
        return _error_response(e)
    except Exception as e:
        logger.error(f"Error in metric: {str(e)}")
        return jsonify({
            'success': False,
            'error': str(e)
        }), 500


@app.route('/api/verify', methods=['POST'])
def verify_async():
    """
    Start a verification run in the background
    ---
    tags:
      - Verification
    parameters:
      - in: body
        name: body
        schema:
          type: object
          example: {"preset": "pulse", "grid": "0.5:0.7:11,0.1:0.3:11", "refine": false}
    responses:
      202:
        description: Run accepted; poll the status endpoint
    """
    try:
        config = _run_config('verify')

        task_id = task_manager.create_task('verify', config.to_dict())
        DatabaseService.save_run(task_id, 'verify', config.preset, config.to_dict())

        thread = threading.Thread(
            target=_run_verification_async,
            args=(task_id, config)
        )
        thread.daemon = True
        thread.start()

        return jsonify({
            'success': True,
            'task_id': task_id,
            'message': 'Verification started',
            'status_url': f'/api/verify/status/{task_id}'
        }), 202

    except WHGravError as e:
        return _error_response(e)
    except Exception as e:
        logger.error(f"Error starting verification: {str(e)}")
        return jsonify({
            'success': False,
            'error': str(e)
        }), 500


@app.route('/api/verify/status/<task_id>', methods=['GET'])
def get_verification_status(task_id: str):
    """Get verification run status
    ---
    tags:
      - Verification
    parameters:
      - in: path
        name: task_id
        type: string
        required: true
    responses:
      200:
        description: Current status
      404:
        description: Unknown task
    """
    task = task_manager.get_task(task_id)
    if not task:
        return jsonify({
            'success': False,
            'error': 'Task not found'
        }), 404

    return jsonify({
        'success': True,
        'task_id': task_id,
        'status': task['status'],
        'created_at': task['created_at'],
        'updated_at': task['updated_at']
    }), 200


@app.route('/api/verify/results/<task_id>', methods=['GET'])
def get_verification_results(task_id: str):
    """Get the verification report
    ---
    tags:
      - Verification
    parameters:
      - in: path
        name: task_id
        type: string
        required: true
    responses:
      200:
        description: Report (or the current status while running)
      404:
        description: Unknown task
    """
    task = task_manager.get_task(task_id)
    if not task:
        return jsonify({
            'success': False,
            'error': 'Task not found'
        }), 404

    if task['status'] in (TaskStatus.PENDING.value, TaskStatus.RUNNING.value):
        return jsonify({
            'success': True,
            'status': task['status'],
            'message': 'Verification still running'
        }), 200

    return jsonify({
        'success': task['status'] == TaskStatus.COMPLETED.value,
        'status': task['status'],
        'report': task['result'],
        'error': task['error']
    }), 200


@app.route('/api/runs', methods=['GET'])
def list_runs():
    """List stored verification runs
    ---
    tags:
      - Verification
    parameters:
      - in: query
        name: limit
        type: integer
        default: 50
    responses:
      200:
        description: Most recent runs first (empty without a database)
    """
    try:
        limit = int(request.args.get('limit', 50))
        runs = DatabaseService.list_runs(limit)
        return jsonify({
            'success': True,
            'count': len(runs),
            'runs': runs
        }), 200

    except ValueError:
        return jsonify({
            'success': False,
            'error': 'limit must be an integer'
        }), 400


# Background task functions
def _run_verification_async(task_id: str, config: RunConfig):
    """Run the verification suite in background"""
    try:
        task_manager.update_task_status(task_id, TaskStatus.RUNNING)
        DatabaseService.update_run(task_id, 'running')

        report = run_verify(config).to_dict()

        task_manager.update_task_status(task_id, TaskStatus.COMPLETED, result=report)
        DatabaseService.update_run(task_id, 'completed', report=report)

    except WHGravError as e:
        logger.error(f"Verification {task_id} refused: {e.message}")
        task_manager.update_task_status(task_id, TaskStatus.FAILED, error=e.to_dict())
        DatabaseService.update_run(task_id, 'failed', error=e.message)

    except Exception as e:
        logger.error(f"Error in async verification: {str(e)}")
        task_manager.update_task_status(task_id, TaskStatus.FAILED, error=str(e))
        DatabaseService.update_run(task_id, 'failed', error=str(e))


if __name__ == '__main__':
    logger.info(f"Starting Flask API on {Config.HOST}:{Config.PORT}")
    app.run(
        host=Config.HOST,
        port=Config.PORT,
        debug=Config.DEBUG
    )
