# app/routes/__init__.py

