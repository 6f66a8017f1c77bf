"""
Base class for the qkdlc management commands
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import (
    DomainError, FitDegenerateError, ParameterValidationError, StatisticalValidationError,
)
from ..serializers import FORMAT_CHOICES
from ..utilities import atomic_write

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_STATISTICAL = 4


class QkdCommand(BaseCommand):
    """
    Flags, an optional --config JSON document and the command's serializer
    produce one validated parameter set; library exceptions become exit codes.
    """
    serializer_class = None

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            type=str,
            help='JSON file whose keys override the command-line flags'
        )
        parser.add_argument(
            '--output',
            type=str,
            help='Output path (stdout when omitted)'
        )
        parser.add_argument(
            '--format',
            choices=FORMAT_CHOICES,
            help='Output format'
        )
        parser.add_argument(
            '--xi',
            type=float,
            help='Fiber attenuation coefficient xi in 1/km (loss = 10 xi dB/km, default 0.02)'
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_parameters(self, options: Dict[str, Any]):
        """Merge flags with the --config document and validate the result."""
        fields = self.serializer_class().fields
        data = {name: options[name] for name in fields if options.get(name) is not None}

        config_path = options.get('config')
        if config_path:
            try:
                with open(config_path, 'r') as f:
                    overrides = json.load(f)
            except FileNotFoundError:
                raise CommandError(f'Config file not found: {config_path}', returncode=EXIT_USAGE)
            except json.JSONDecodeError:
                raise CommandError(f'Invalid JSON in config file: {config_path}', returncode=EXIT_USAGE)
            if not isinstance(overrides, dict):
                raise CommandError('Config document must be a JSON object', returncode=EXIT_USAGE)
            data.update(overrides)

        serializer = self.serializer_class(data=data)
        if not serializer.is_valid():
            logger.error(f'Invalid parameters: {serializer.errors}')
            raise CommandError(f'Invalid parameters: {json.dumps(serializer.errors)}', returncode=EXIT_USAGE)
        return serializer

    def handle(self, *args, **options):
        serializer = self.load_parameters(options)
        try:
            return self.run(serializer, serializer.validated_data)
        except (DomainError, ParameterValidationError) as e:
            logger.error(f'{self.__module__}: {e}')
            raise CommandError(str(e), returncode=EXIT_USAGE)
        except FitDegenerateError as e:
            logger.error(f'{self.__module__}: {e}')
            raise CommandError(f'Degenerate fit: {e}', returncode=EXIT_DEGENERATE)
        except StatisticalValidationError as e:
            logger.error(f'{self.__module__}: {e}')
            raise CommandError(str(e), returncode=EXIT_STATISTICAL)

    def run(self, serializer, params: Dict[str, Any]):
        raise NotImplementedError

    def emit(self, text: str, output: Optional[str] = None):
        """Write `text` atomically to `output`, or to stdout."""
        if output:
            atomic_write(output, text)
            self.stderr.write(self.style.SUCCESS(f'Wrote {output}'))
        else:
            self.stdout.write(text, ending='')

    @staticmethod
    def output_dir(output: Optional[str]) -> Optional[Path]:
        if not output:
            return None
        path = Path(output)
        path.mkdir(parents=True, exist_ok=True)
        return path
