from rest_framework import serializers

from .channel import DEFAULT_XI_PER_KM, ChannelState, FiberSpec, LocalLeak, total_artificial_leak
from .exceptions import DomainError
from .natural_loss import DEFAULT_INTENSITY, DEFAULT_THRESHOLD_BITS
from .rate_functions.params import ErrorParams, FormulaId, Protocol
from .utilities import parse_range

PROTOCOL_CHOICES = [protocol.value for protocol in Protocol]
FORMAT_CHOICES = ['csv', 'json']


def _range_field(value):
    try:
        return parse_range(value)
    except DomainError as e:
        raise serializers.ValidationError(str(e))


class LeakSerializer(serializers.Serializer):
    position_km = serializers.FloatField(min_value=0.0)
    magnitude = serializers.FloatField(min_value=0.0)

    def validate_magnitude(self, value):
        if value >= 1.0:
            raise serializers.ValidationError('magnitude must be below 1')
        return value


class ChannelLeakSerializer(LeakSerializer):
    benign = serializers.BooleanField(default=False)


class ChannelStateSerializer(serializers.Serializer):
    """
    Channel document:
    {"xi_per_km": n, "length_km": n, "leaks": [{"position_km": n, "magnitude": n, "benign": b}]}
    """
    xi_per_km = serializers.FloatField(source='fiber.attenuation_xi', default=DEFAULT_XI_PER_KM)
    length_km = serializers.FloatField(source='fiber.length_km', min_value=0.0)
    leaks = ChannelLeakSerializer(many=True, required=False)
    total_artificial_leak = serializers.SerializerMethodField()

    def get_total_artificial_leak(self, obj):
        return total_artificial_leak(obj)

    def validate(self, attrs):
        try:
            attrs['channel'] = self._build(attrs)
        except DomainError as e:
            raise serializers.ValidationError(str(e))
        return attrs

    @staticmethod
    def _build(attrs) -> ChannelState:
        fiber = FiberSpec(**attrs['fiber'])
        leaks = tuple(LocalLeak(**leak) for leak in attrs.get('leaks', []))
        return ChannelState(fiber, leaks)

    def create(self, validated_data):
        return validated_data['channel']


class TomogramSerializer(serializers.Serializer):
    slope_dB_per_km = serializers.FloatField(source='fitted_slope_dB_per_km')
    leaks = LeakSerializer(many=True)
    residual_rms_dB = serializers.FloatField()


class RunConfigSerializer(serializers.Serializer):
    """Options shared by every command."""
    output = serializers.CharField(required=False, allow_null=True, default=None)
    format = serializers.ChoiceField(choices=FORMAT_CHOICES, default='csv')
    xi = serializers.FloatField(default=DEFAULT_XI_PER_KM)

    def validate_xi(self, value):
        if not value > 0:
            raise serializers.ValidationError('attenuation must be positive')
        return value

    @property
    def fiber(self) -> FiberSpec:
        return FiberSpec(self.validated_data['xi'])


class ErrorOptionsSerializer(serializers.Serializer):
    perr = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.0)
    perr_z = serializers.FloatField(min_value=0.0, max_value=1.0, required=False, allow_null=True, default=None)

    @property
    def error_params(self) -> ErrorParams:
        return ErrorParams(self.validated_data['perr'], self.validated_data['perr_z'])


class RatesSerializer(ErrorOptionsSerializer, RunConfigSerializer):
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES)
    re = serializers.ListField(child=serializers.FloatField(min_value=0.0, max_value=1.0), min_length=1)
    d = serializers.CharField(default='50:250:1')
    mu = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    optimize_intensity = serializers.BooleanField(default=False)

    def validate_d(self, value):
        return _range_field(value)

    def validate(self, attrs):
        if attrs.get('mu') is not None and attrs.get('optimize_intensity'):
            raise serializers.ValidationError('--mu and --optimize-intensity are mutually exclusive')
        return attrs


class NaturalLossSerializer(RunConfigSerializer):
    mu = serializers.FloatField(min_value=0.0, default=DEFAULT_INTENSITY)
    l = serializers.CharField(default='0:1:0.01')
    threshold = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=DEFAULT_THRESHOLD_BITS)
    fiber_length = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)

    def validate_l(self, value):
        return _range_field(value)


class TomographySerializer(RunConfigSerializer):
    channel = serializers.CharField()
    trace = serializers.CharField(required=False, allow_null=True, default=None)
    format = serializers.ChoiceField(choices=['json'], default='json')
    resolution = serializers.FloatField(default=0.05)
    noise_sigma = serializers.FloatField(min_value=0.0, default=0.0)
    n_averages = serializers.IntegerField(min_value=1, default=1)
    seed = serializers.IntegerField(min_value=0, default=0)
    min_leak = serializers.FloatField(min_value=0.0, max_value=1.0, required=False, allow_null=True, default=None)
    accuracy = serializers.BooleanField(default=False)
    confidence = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.95)
    trials = serializers.IntegerField(min_value=1, default=200)
    mod_freq = serializers.FloatField(default=1e6)
    sample_rate = serializers.FloatField(default=16e6)
    duration = serializers.FloatField(default=1e-3)
    one_over_f = serializers.FloatField(min_value=0.0, default=0.0)
    white_noise = serializers.FloatField(min_value=0.0, default=0.0)

    def validate_resolution(self, value):
        if not value > 0:
            raise serializers.ValidationError('resolution must be positive')
        return value


class MonteCarloSerializer(RunConfigSerializer):
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES)
    mu = serializers.FloatField(min_value=0.0)
    d = serializers.FloatField(min_value=0.0)
    re = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.0)
    n = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0, default=0)
    format = serializers.ChoiceField(choices=['json'], default='json')


class OptimalIntensitySerializer(ErrorOptionsSerializer, RunConfigSerializer):
    formula = serializers.ChoiceField(choices=[f.value for f in FormulaId if f is not FormulaId.PLOB])
    re = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.0)
    d = serializers.CharField(default='50:250:1')

    def validate_d(self, value):
        return _range_field(value)


class ErrorSweepSerializer(RunConfigSerializer):
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES, default=Protocol.BB84.value)
    d = serializers.FloatField(min_value=0.0, default=200.0)
    re = serializers.ListField(child=serializers.FloatField(min_value=0.0, max_value=1.0),
                               min_length=1, default=[0.005, 0.01, 0.1])
    perr = serializers.CharField(default='0:0.5:0.01')

    def validate_perr(self, value):
        grid = _range_field(value)
        if any(not 0.0 <= p <= 1.0 for p in grid):
            raise serializers.ValidationError('error probabilities must lie in [0, 1]')
        return grid


class BoostSerializer(ErrorOptionsSerializer, RunConfigSerializer):
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES)
    d = serializers.FloatField(min_value=0.0, default=200.0)
    re = serializers.FloatField(min_value=0.0, max_value=1.0)
    d_lo = serializers.FloatField(min_value=0.0, default=50.0)
    d_hi = serializers.FloatField(min_value=0.0, default=250.0)
    format = serializers.ChoiceField(choices=['json'], default='json')

    def validate(self, attrs):
        if not 0 < attrs['d_lo'] < attrs['d_hi']:
            raise serializers.ValidationError('need 0 < d_lo < d_hi')
        return attrs
