"""
``autoflow`` console script.

Configures a minimal Django project around the autoflow app so the
management commands run without a host project, then dispatches to them:

    autoflow optimize --config run.json --seed 7
    autoflow validate-grammar --grammar my.bnf
"""

import os
import sys

import django
from django.conf import settings
from django.core.management import execute_from_command_line

COMMANDS = ('optimize', 'evaluate', 'validate_grammar', 'ablate')
ALIASES = {'validate-grammar': 'validate_grammar'}


def logging_config(level: str) -> dict:
    return {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'plain': {'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'},
        },
        'handlers': {
            'console': {'class': 'logging.StreamHandler', 'formatter': 'plain', 'stream': 'ext://sys.stderr'},
        },
        'loggers': {
            'autoflow': {'handlers': ['console'], 'level': level, 'propagate': False},
        },
    }


def configure() -> None:
    """Install standalone settings unless a host project already did."""
    if settings.configured or os.environ.get('DJANGO_SETTINGS_MODULE'):
        return
    settings.configure(
        INSTALLED_APPS=['django.contrib.contenttypes', 'django.contrib.auth', 'autoflow'],
        DATABASES={
            'default': {
                'ENGINE': 'django.db.backends.sqlite3',
                'NAME': os.environ.get('AUTOFLOW_DB', 'autoflow.sqlite3'),
            }
        },
        DEFAULT_AUTO_FIELD='django.db.models.BigAutoField',
        USE_TZ=True,
        LOGGING=logging_config(os.environ.get('AUTOFLOW_LOG_LEVEL', 'INFO').upper()),
    )
    django.setup()


def main(argv=None) -> None:
    argv = list(sys.argv if argv is None else argv)
    if len(argv) > 1:
        argv[1] = ALIASES.get(argv[1], argv[1])
    if len(argv) < 2 or argv[1] not in COMMANDS + ('help', '--help', '-h', 'migrate'):
        sys.stderr.write(f"usage: autoflow {{{','.join(COMMANDS)}}} [options]\n")
        raise SystemExit(1)
    configure()
    execute_from_command_line(['autoflow'] + argv[1:])


if __name__ == '__main__':
    main()
