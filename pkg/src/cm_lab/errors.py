class CMLabError(Exception):
    code = "cm_lab_error"

    def __init__(self, message, code=None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code


class UnsupportedDimensionError(CMLabError):
    code = "unsupported_dimension"


class LabelMismatchError(CMLabError):
    code = "label_mismatch"


class InvalidPointError(CMLabError):
    code = "invalid_point"


class OrderOutOfRangeError(CMLabError):
    code = "order_out_of_range"


class QuadratureError(CMLabError):
    code = "quadrature_nonconvergence"


class AccelerationDivergenceError(CMLabError):
    code = "acceleration_divergence"


class NormalizationError(CMLabError):
    code = "normalization_failure"


class LatticeBoundError(CMLabError):
    code = "lattice_bound_exceeded"


class SeedMissingError(CMLabError):
    code = "missing_seed"


class PointOutsideRegionsError(CMLabError):
    code = "point_outside_regions"


class WeightSumError(CMLabError):
    code = "weight_sum_violation"


class PointSetFileError(CMLabError):
    code = "bad_point_set_file"


class UsageError(CMLabError):
    code = "usage_error"


class ReportIOError(CMLabError):
    code = "report_io_error"


class OverflowScaleWarning(RuntimeWarning):
    pass
