"""
WSGI entry point for the whgrav API (gunicorn wsgi:app)
"""
from app import app
from config import Config

if __name__ == "__main__":
    app.run(host=Config.HOST, port=Config.PORT)
