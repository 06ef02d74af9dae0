use super::HOURS_PER_YEAR;

/// Daily handset usage. Outside talk time the phone draws its idle power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageProfile {
    pub talk_hours_per_day: f64,
    pub talk_power_w: f64,
    pub idle_power_w: f64,
    pub charger_standby_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSideEnergy {
    /// kWh per year.
    pub phone_kwh: f64,
    pub charger_kwh: f64,
    /// Shares of the operator-side energy per subscriber.
    pub phone_fraction: f64,
    pub charger_fraction: f64,
}

/// Yearly handset and charger energy, also as fractions of the operator's
/// per-subscriber energy (`per_subscriber_kwh`). Fractions are 0 when the
/// operator figure is 0.
pub fn user_side_energy(profile: &UsageProfile, per_subscriber_kwh: f64) -> UserSideEnergy {
    let talk = profile.talk_hours_per_day.clamp(0.0, 24.0);
    let phone_wh_per_day = talk * profile.talk_power_w + (24.0 - talk) * profile.idle_power_w;
    let phone_kwh = phone_wh_per_day * 365.0 / 1000.0;
    let charger_kwh = profile.charger_standby_w * HOURS_PER_YEAR / 1000.0;
    let frac = |x: f64| if per_subscriber_kwh > 0.0 { x / per_subscriber_kwh } else { 0.0 };
    UserSideEnergy {
        phone_kwh,
        charger_kwh,
        phone_fraction: frac(phone_kwh),
        charger_fraction: frac(charger_kwh),
    }
}
