from rest_framework import serializers

from .automata import format_word


class RationalField(serializers.Field):
    """Exact rationals travel as strings such as "5/8" so no precision is lost."""

    def to_representation(self, value):
        return str(value)


class WordField(serializers.Field):
    def to_representation(self, value):
        return format_word(value)


class TransitionSerializer(serializers.Serializer):
    source = serializers.CharField()
    symbol = serializers.CharField()
    target = serializers.CharField()


class RunWitnessSerializer(serializers.Serializer):
    """Two distinct runs with the same start, end and label."""
    start = serializers.CharField()
    end = serializers.CharField()
    label = WordField()
    run1 = TransitionSerializer(many=True)
    run2 = TransitionSerializer(many=True)


class ComponentSerializer(serializers.Serializer):
    states = serializers.ListField(child=serializers.CharField())
    recurrent = serializers.BooleanField()


class CoverSerializer(serializers.Serializer):
    states = serializers.ListField(child=serializers.CharField())
    transitions = TransitionSerializer(many=True)
    subsets = serializers.DictField(child=serializers.ListField(child=serializers.CharField()), allow_null=True)


class BifutureTermSerializer(serializers.Serializer):
    origin = serializers.CharField()
    word = WordField()
    branch_state = serializers.CharField()
    symbol = serializers.CharField()
    targets = serializers.ListField(child=serializers.CharField())
    measure_state = serializers.CharField(allow_null=True)


class ReportSerializer(serializers.Serializer):
    """
    Fields shared by every report: the sub-command, the tool version and a
    SHA-256 digest of each input file keyed by its path.
    """
    command = serializers.CharField()
    version = serializers.CharField()
    inputs = serializers.DictField(child=serializers.CharField())


class ValidateReportSerializer(ReportSerializer):
    valid = serializers.BooleanField()
    errors = serializers.ListField(child=serializers.CharField())
    states = serializers.IntegerField()
    transitions = serializers.IntegerField()
    deterministic = serializers.BooleanField()
    shift_mode = serializers.BooleanField()


class SccReportSerializer(ReportSerializer):
    strongly_connected = serializers.BooleanField()
    components = ComponentSerializer(many=True)


class AmbiguityReportSerializer(ReportSerializer):
    unambiguous = serializers.BooleanField()
    witness = RunWitnessSerializer(allow_null=True)


class FischerReportSerializer(ReportSerializer):
    cover = CoverSerializer()


class SyncWordReportSerializer(ReportSerializer):
    synchronizing = serializers.BooleanField()
    word = WordField(allow_null=True)


class EntropyReportSerializer(ReportSerializer):
    entropy = serializers.FloatField(allow_null=True)
    cover_states = serializers.IntegerField()


class SpectralReportSerializer(ReportSerializer):
    matrix = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    radius = serializers.FloatField()
    log_radius = serializers.FloatField(allow_null=True)
    iterations = serializers.IntegerField()
    residual = serializers.FloatField()
    tolerance = serializers.FloatField()


class Theorem1ReportSerializer(ReportSerializer):
    i = serializers.BooleanField(source='unambiguous')
    ii = serializers.BooleanField(source='accepts_shift')
    iii = serializers.BooleanField(source='entropy_matches')
    consistent = serializers.BooleanField()
    log_radius = serializers.FloatField(allow_null=True)
    entropy = serializers.FloatField(allow_null=True)
    tolerance = serializers.FloatField()
    witness = RunWitnessSerializer(allow_null=True)
    counterexample = WordField(allow_null=True)


class MeasureWordReportSerializer(ReportSerializer):
    word = WordField()
    measure = RationalField()


class CylindersReportSerializer(ReportSerializer):
    words = serializers.ListField(child=WordField())
    antichain = serializers.ListField(child=WordField())
    measure = RationalField()


class SupportCheckReportSerializer(ReportSerializer):
    equal = serializers.BooleanField()
    counterexample = WordField(allow_null=True)


class BifutureReportSerializer(ReportSerializer):
    state = serializers.CharField()
    null = serializers.BooleanField()
    term = BifutureTermSerializer(allow_null=True)
    term_measure = RationalField(allow_null=True)


class Theorem2ReportSerializer(ReportSerializer):
    hypotheses_ok = serializers.BooleanField()
    reasons = serializers.ListField(child=serializers.CharField())
    unambiguous = serializers.BooleanField()
    all_bifutures_null = serializers.BooleanField()
    equivalence_holds = serializers.BooleanField()
    null_states = serializers.DictField(child=serializers.BooleanField())
    witness = RunWitnessSerializer(source='ambiguity_witness', allow_null=True)
    positive_term = BifutureTermSerializer(allow_null=True)


class EstimateReportSerializer(ReportSerializer):
    state = serializers.CharField()
    generator = serializers.CharField()
    estimate = serializers.FloatField()
    wilson_interval = serializers.ListField(child=serializers.FloatField())
    hits = serializers.IntegerField()
    prefix_length = serializers.IntegerField()
    trials = serializers.IntegerField()
    seed = serializers.IntegerField()
