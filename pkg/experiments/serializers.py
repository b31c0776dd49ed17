import math
from pathlib import Path

from rest_framework import serializers

from splines.polyroots import RootMethod
from splines.smoothers import Method

from .solver_config import get_fit_config


class SampleSerializer(serializers.Serializer):
    """
    Serializer for one (x, y) row of a dataset CSV
    """
    x = serializers.FloatField()
    y = serializers.FloatField()

    def validate_x(self, value):
        if not math.isfinite(value):
            raise serializers.ValidationError('x must be a finite number')
        return value

    def validate_y(self, value):
        """
        Reject non-finite values, and negative ones unless the context allows them
        """
        if not math.isfinite(value):
            raise serializers.ValidationError('y must be a finite number')
        if value < 0.0 and not self.context.get('allow_negative', False):
            raise serializers.ValidationError('y must be nonnegative')
        return value


class ExperimentSpecSerializer(serializers.Serializer):
    """
    Serializer that validates an experiment request and creates an ExperimentSpec
    """
    n_values = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    degrees = serializers.ListField(
        child=serializers.IntegerField(min_value=3, max_value=10), allow_empty=False
    )
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False)
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=[method.value for method in Method]), allow_empty=True
    )
    lam = serializers.FloatField(required=False, allow_null=True)
    epsilon = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    grid_points = serializers.IntegerField(required=False, allow_null=True, min_value=2)
    max_cp_iterations = serializers.IntegerField(required=False, allow_null=True, min_value=1)
    root_strategy = serializers.ChoiceField(
        choices=[RootMethod.CLOSED_FORM.value, RootMethod.COMPANION_MATRIX.value],
        required=False, allow_null=True,
    )
    shift_negative = serializers.BooleanField(required=False, allow_null=True, default=None)
    output_dir = serializers.CharField()
    plot = serializers.BooleanField(default=False)
    magnify = serializers.ListField(
        child=serializers.FloatField(), min_length=2, max_length=2, required=False, allow_null=True
    )
    workers = serializers.IntegerField(min_value=1, default=1)

    def validate_lam(self, value):
        if value is not None and not value > 0.0:
            raise serializers.ValidationError('lambda must be positive')
        return value

    def validate_magnify(self, value):
        if value is not None and not value[0] < value[1]:
            raise serializers.ValidationError('magnify needs lower < upper')
        return value

    def validate(self, attrs):
        """
        Duplicate cells would overwrite each other in the report
        """
        for name in ('n_values', 'degrees', 'seeds', 'methods'):
            if len(set(attrs[name])) != len(attrs[name]):
                raise serializers.ValidationError({name: 'values must be unique'})
        return attrs

    def create(self, validated_data):
        from .runner import ExperimentSpec

        config = get_fit_config(
            degree=validated_data['degrees'][0],
            lam=validated_data.get('lam'),
            epsilon=validated_data.get('epsilon'),
            grid_points=validated_data.get('grid_points'),
            max_cp_iterations=validated_data.get('max_cp_iterations'),
            root_strategy=validated_data.get('root_strategy'),
            shift_negative=validated_data.get('shift_negative'),
        )
        magnify = validated_data.get('magnify')
        return ExperimentSpec(
            n_values=tuple(validated_data['n_values']),
            degrees=tuple(validated_data['degrees']),
            seeds=tuple(validated_data['seeds']),
            methods=tuple(Method(name) for name in validated_data['methods']),
            config=config,
            output_dir=Path(validated_data['output_dir']),
            plot=validated_data['plot'],
            magnify=tuple(magnify) if magnify else None,
            workers=validated_data['workers'],
        )


class IterationSerializer(serializers.Serializer):
    r = serializers.IntegerField()
    cost = serializers.FloatField()
    cuts_added = serializers.IntegerField()
    cuts_rejected = serializers.IntegerField()
    worst_minimum = serializers.FloatField()
    qp_iterations = serializers.IntegerField()
    qp_status = serializers.CharField(source='qp_status.value')


class FitResultSerializer(serializers.Serializer):
    """
    Read-only JSON view of a FitResult
    """
    method = serializers.CharField(source='method.value')
    termination = serializers.CharField(source='termination.value')
    cost = serializers.FloatField()
    degree = serializers.IntegerField(source='coefficients.degree')
    knots = serializers.SerializerMethodField()
    coefficients = serializers.SerializerMethodField()
    cp_iterations = serializers.IntegerField()
    total_cuts = serializers.IntegerField()
    grid_min = serializers.FloatField()
    worst_minimum = serializers.FloatField()
    shift = serializers.FloatField()
    wall_time = serializers.FloatField()
    assembly_time = serializers.FloatField()
    cp_trace = IterationSerializer(many=True)

    def get_knots(self, obj):
        return obj.coefficients.partition.knots.tolist()

    def get_coefficients(self, obj):
        return obj.coefficients.b.tolist()


class ReportRowSerializer(serializers.Serializer):
    """
    One experiment cell; the first nine fields are the report CSV columns
    """
    n = serializers.IntegerField(source='key.n')
    d = serializers.IntegerField(source='key.d')
    seed = serializers.IntegerField(source='key.seed')
    method = serializers.CharField(source='key.method')
    cost = serializers.FloatField(allow_null=True)
    time_ms = serializers.FloatField(allow_null=True)
    cp_iterations = serializers.IntegerField(allow_null=True)
    total_cuts = serializers.IntegerField(allow_null=True)
    grid_min = serializers.FloatField(allow_null=True)
    termination = serializers.CharField(allow_null=True)
    error = serializers.CharField(allow_null=True)


REPORT_COLUMNS = ['n', 'd', 'seed', 'method', 'cost', 'time_ms', 'cp_iterations', 'total_cuts', 'grid_min']
