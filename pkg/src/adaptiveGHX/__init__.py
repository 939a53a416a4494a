"""Root package for the adaptiveGHX control laboratory."""
