from django.conf import settings
from rest_framework import serializers

from .labeldist import AGGREGATIONS, PRIORS
from .models import RunRecord
from .recognize import SCHEMES
from .selection import METHODS
from .summarize import SUMMARY_METHODS
from .synthetic import KINDS


def _default(key):
    return settings.MMIDICT[key]


class RunConfigSerializer(serializers.Serializer):
    """Fields every run shares; subclasses add their own."""
    seed = serializers.IntegerField(default=0, min_value=0,
                                    max_value=2 ** 64 - 1)
    out = serializers.CharField()

    def create(self, validated_data):
        pass

    def update(self, instance, validated_data):
        pass


class TrainConfigSerializer(RunConfigSerializer):
    features = serializers.CharField()
    atoms = serializers.IntegerField(min_value=1)
    sparsity = serializers.IntegerField(min_value=1)
    iters = serializers.IntegerField(
        min_value=1, default=lambda: _default('KSVD_ITERS'))
    tol = serializers.FloatField(
        min_value=0.0, default=lambda: _default('KSVD_TOL'))
    exclude_class = serializers.IntegerField(
        min_value=1, required=False, allow_null=True, default=None)
    aggregation = serializers.ChoiceField(choices=AGGREGATIONS, default='abs')
    prior = serializers.ChoiceField(choices=PRIORS, default='mass')

    def validate(self, data):
        if data['sparsity'] > data['atoms']:
            raise serializers.ValidationError(
                {'sparsity': 'sparsity cannot exceed the number of atoms'})
        return data


class SelectConfigSerializer(RunConfigSerializer):
    dictionary = serializers.CharField()
    codes = serializers.CharField()
    features = serializers.CharField()
    method = serializers.ChoiceField(choices=METHODS)
    k = serializers.IntegerField(min_value=1)
    lam = serializers.FloatField(
        min_value=0.0, required=False, allow_null=True, default=None)
    min_gain = serializers.FloatField(
        required=False, allow_null=True, default=None)
    tau = serializers.FloatField(min_value=0.0,
                                 default=lambda: _default('TAU'))
    jitter = serializers.FloatField(min_value=0.0,
                                    default=lambda: _default('JITTER'))
    variance_floor = serializers.FloatField(
        default=lambda: _default('VARIANCE_FLOOR'))
    dense = serializers.BooleanField(default=False)
    aggregation = serializers.ChoiceField(choices=AGGREGATIONS, default='abs')
    prior = serializers.ChoiceField(choices=PRIORS, default='mass')
    dump_kernel = serializers.BooleanField(default=False)

    def validate_variance_floor(self, value):
        if value <= 0:
            raise serializers.ValidationError('must be positive')
        return value

    def validate(self, data):
        method = data['method']
        if method == 'mmi3' and data['k'] < 2:
            raise serializers.ValidationError(
                {'k': 'mmi3 keeps at least 2 atoms'})
        if data['lam'] is not None and method != 'mmi2':
            raise serializers.ValidationError(
                {'lam': 'lambda only applies to mmi2'})
        if data['min_gain'] is not None and method not in ('mmi1', 'mmi2'):
            raise serializers.ValidationError(
                {'min_gain': 'gain threshold only applies to mmi1 and mmi2'})
        return data


class EncodeConfigSerializer(RunConfigSerializer):
    dictionary = serializers.CharField()
    features = serializers.CharField()
    sparsity = serializers.IntegerField(min_value=1)


class ClassifyConfigSerializer(RunConfigSerializer):
    SPLITS = ('group', 'kfold')

    dictionary = serializers.CharField()
    train = serializers.CharField()
    test = serializers.CharField(required=False, allow_null=True,
                                 default=None)
    split = serializers.ChoiceField(choices=SPLITS, required=False,
                                    allow_null=True, default=None)
    folds = serializers.IntegerField(min_value=2, default=5)
    scheme = serializers.ChoiceField(choices=SCHEMES, default='dtw')
    knn = serializers.IntegerField(min_value=1,
                                   default=lambda: _default('KNN'))
    sparsity = serializers.IntegerField(min_value=1)
    absolute = serializers.BooleanField(default=False)

    def validate(self, data):
        if data['split'] is None and data['test'] is None:
            raise serializers.ValidationError(
                'give a test file or a --split')
        if data['split'] is not None and data['test'] is not None:
            raise serializers.ValidationError(
                'a test file and a --split are mutually exclusive')
        return data


class SummarizeConfigSerializer(RunConfigSerializer):
    features = serializers.CharField()
    k = serializers.IntegerField(min_value=1,
                                 default=lambda: _default('SUMMARY_K'))
    method = serializers.ChoiceField(choices=SUMMARY_METHODS, default='mmi1')
    blocks = serializers.ListField(
        child=serializers.IntegerField(min_value=1), required=False,
        allow_null=True, allow_empty=False, default=None)
    normalize = serializers.BooleanField(default=True)


class EvalConfigSerializer(RunConfigSerializer):
    dictionary = serializers.CharField()
    codes = serializers.CharField(required=False, allow_null=True,
                                  default=None)
    features = serializers.CharField(required=False, allow_null=True,
                                     default=None)
    aggregation = serializers.ChoiceField(choices=AGGREGATIONS, default='abs')
    bins = serializers.IntegerField(
        min_value=1, default=lambda: _default('HISTOGRAM_BINS'))
    sparsity = serializers.IntegerField(min_value=1, required=False,
                                        allow_null=True, default=None)

    def validate(self, data):
        if data['codes'] is not None and data['features'] is None:
            raise serializers.ValidationError(
                {'features': 'codes need the feature file they encode'})
        if data['sparsity'] is not None and data['features'] is None:
            raise serializers.ValidationError(
                {'features': 'reconstruction needs a feature file'})
        return data


class GenConfigSerializer(RunConfigSerializer):
    kind = serializers.ChoiceField(choices=KINDS)
    n = serializers.IntegerField(min_value=1, required=False)
    classes = serializers.IntegerField(min_value=1, required=False)
    sequences = serializers.IntegerField(min_value=1, required=False)
    frames = serializers.IntegerField(min_value=1, required=False)
    atoms = serializers.IntegerField(min_value=1, required=False)
    sparsity = serializers.IntegerField(min_value=1, required=False)
    noise = serializers.FloatField(min_value=0.0, required=False)

    def validate(self, data):
        allowed = {
            'sparse': {'n', 'frames', 'atoms', 'sparsity', 'sequences',
                       'noise'},
            'mixture': {'n', 'classes', 'sequences', 'frames', 'noise'},
            'actions': {'n', 'classes', 'sequences', 'frames', 'noise'},
            'clusters': {'n', 'classes', 'sequences', 'frames', 'noise'},
            'attributes': {'n', 'classes', 'sequences', 'frames', 'noise'},
        }[data['kind']]
        extra = sorted(set(data) - allowed - {'kind', 'seed', 'out'})
        if extra:
            raise serializers.ValidationError(
                f"{', '.join(extra)} not used by kind {data['kind']}")
        return data


class RunRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = RunRecord
        fields = '__all__'
