"""Schengen-visa evidential protocol."""

from .protocol import (
    ControlReport,
    NoMatchingDemand,
    NotConsulate,
    NotCurrentTime,
    NotOfficer,
    Refusal,
    TimestampMismatch,
    check_demanding,
    control,
    deliver,
    delivering_validation,
    demand,
    demand_action,
    is_alert,
    make,
    make_answer,
    suspect,
)
from .queries import ClaimQuery, SufficientMeansQuery
from .records import (
    Accommodation,
    Flight,
    MeansKind,
    Passport,
    Photo,
    SchengenDemand,
    SchengenForm,
    SufficientMeans,
    TravelHealth,
    Visa,
    bank_statement,
    cash,
    credit_card,
    employment,
)
from .validation import (
    REQUIREMENTS,
    ClaimCheck,
    CountryRegistry,
    MeansRule,
    Modes,
    RequirementRow,
    SchengenError,
    UnknownCountry,
    ValidationReport,
    accommodations_consistency,
    accommodations_validation,
    travels_consistency,
    travels_validation,
    valid_passport_at,
    validate_demand,
)
