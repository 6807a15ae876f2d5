//! Markdown rendering of a due-diligence report.
//!
//! Every number goes through `outsideview_core::display`, so the text
//! matches the JSON `display` strings.

use std::fmt::Write;

use outsideview_core::diligence::{DueDiligenceReport, Section, SubgroupAnalysis};
use outsideview_core::display::{fraction_pct, level, percent, percent_1dp, ratio, value};
use outsideview_core::Source;

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map_or_else(|| String::from("n/a"), f)
}

fn section<T>(out: &mut String, s: &Section<T>, body: impl FnOnce(&mut String, &T)) {
    match s {
        Section::Assessed(t) => body(out, t),
        Section::NotAssessed { reason } => {
            let _ = writeln!(out, "_Not assessed: {reason}._\n");
        }
        Section::NotAssessable { reason } => {
            let _ = writeln!(out, "_Not assessable: {reason}._\n");
        }
    }
}

fn warnings(out: &mut String, w: &[String]) {
    for line in w {
        let _ = writeln!(out, "> warning: {line}");
    }
    if !w.is_empty() {
        out.push('\n');
    }
}

fn subgroups(out: &mut String, s: &SubgroupAnalysis) {
    let _ = writeln!(
        out,
        "| {} | n | mean accuracy | mean of overestimates | overestimate of mean | shortfall of mean | shortfall vs rest | overestimate vs rest |",
        s.attribute.as_str()
    );
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
    for f in &s.findings {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            f.key,
            f.n,
            ratio(f.mean),
            opt(f.mean_bias_pct, percent),
            opt(f.bias_of_mean_pct, percent),
            fraction_pct(f.adverse_of_mean),
            opt(f.adverse_ratio_vs_rest, ratio),
            opt(f.bias_ratio_vs_rest, ratio),
        );
    }
    let r = &s.reconciliation;
    let _ = writeln!(
        out,
        "\nWeighted mean of subgroup means {} (pooled {}, benchmark {}).",
        ratio(r.weighted_mean),
        ratio(r.pooled_mean),
        ratio(r.overall_mean)
    );
    if s.excluded_unknown > 0 {
        let _ = writeln!(
            out,
            "{} records with unknown {} left out.",
            s.excluded_unknown,
            s.attribute.as_str()
        );
    }
    out.push('\n');
    warnings(out, &s.warnings);
}

pub fn render(r: &DueDiligenceReport) -> String {
    let mut out = String::new();
    let id = &r.step1_identification;
    let fc = &id.forecast;
    let pv = &id.provenance;
    let _ = writeln!(out, "# Due diligence: {}\n", fc.name);
    let _ = writeln!(
        out,
        "**Verdict: {}**\n",
        r.step8_conclusion.verdict.as_str()
    );

    out.push_str("## 1. Identification\n\n| Item | Value |\n|---|---|\n");
    let _ = writeln!(
        out,
        "| Forecast | {} {} (first year) |",
        value(fc.first_year_forecast),
        fc.unit
    );
    if let (Some(v), Some(y)) = (fc.later_year_forecast, fc.later_year_index) {
        let _ = writeln!(
            out,
            "| Later-year forecast | {} {} (year {y}) |",
            value(v),
            fc.unit
        );
    }
    let d = &fc.downside;
    if let (Some(s), Some(c)) = (d.shortfall_fraction, d.confidence) {
        let _ = writeln!(
            out,
            "| Downside claim | shortfall of at most {} at {} confidence |",
            fraction_pct(s),
            level(c)
        );
    }
    if let Some(sd) = d.claimed_sd {
        let _ = writeln!(out, "| Claimed SD | {} |", percent_1dp(sd));
    }
    if let Some(p) = &fc.rampup_pct_of_forecast {
        let cells: Vec<String> = p.iter().map(|&x| percent(x)).collect();
        let _ = writeln!(out, "| Ramp-up profile | {} |", cells.join(", "));
    }
    let _ = writeln!(
        out,
        "| Forecaster | {} |",
        fc.forecaster_id.as_deref().unwrap_or("not identified")
    );
    let _ = writeln!(out, "| Funding | {} |", fc.funding.as_str());
    let _ = writeln!(
        out,
        "| Benchmark | {} ({}) |",
        pv.benchmark_label,
        match pv.source {
            Source::Records => "records",
            Source::Summary => "summary",
        }
    );
    if let (Some(l), Some(n)) = (&pv.class_label, pv.class_records) {
        let _ = writeln!(out, "| Reference class | {l}, {n} records |");
    }
    let _ = writeln!(out, "| Outlier policy | {} |", pv.outlier_policy.as_str());
    let _ = writeln!(
        out,
        "| Seed / resamples | {} / {} |\n",
        pv.seed, pv.resamples
    );

    let b = &r.step2_benchmark;
    let dist = &b.distribution;
    out.push_str("## 2. Benchmark\n\n| n | mean | median | SD | average overestimate |\n|---:|---:|---:|---:|---:|\n");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} | {} |\n",
        dist.n,
        ratio(dist.mean),
        ratio(dist.median),
        ratio(dist.sd),
        opt(b.mean_bias_pct, percent)
    );
    if b.outliers_excluded > 0 {
        let _ = writeln!(out, "{} outlier record(s) excluded.\n", b.outliers_excluded);
    }
    out.push_str("| p | accuracy |\n|---:|---:|\n");
    for q in &dist.quantiles {
        let _ = writeln!(out, "| {} | {} |", level(q.p), ratio(q.q));
    }
    out.push('\n');
    if !b.adverse_probabilities.is_empty() {
        out.push_str("| shortfall of at least | probability |\n|---:|---:|\n");
        for (s, p) in &b.adverse_probabilities {
            let _ = writeln!(
                out,
                "| {} | {}{} |",
                fraction_pct(*s),
                fraction_pct(p.value),
                if p.span_clamped { " (clamped)" } else { "" }
            );
        }
        out.push('\n');
    }
    out.push_str("Conditional mean of overestimated forecasts: ");
    section(&mut out, &b.conditional_mean_adverse, |o, c| {
        let _ = writeln!(o, "{} over {} records.\n", ratio(c.mean), c.count);
    });
    out.push_str("Bootstrap intervals: ");
    section(&mut out, &b.bootstrap, |o, bs| {
        let _ = writeln!(
            o,
            "{} level, {} resamples, seed {}.\n\n| statistic | lower | upper |\n|---|---:|---:|",
            level(bs.level),
            bs.resamples,
            bs.seed
        );
        for (name, i) in [("mean", &bs.mean), ("median", &bs.median), ("SD", &bs.sd)] {
            let _ = writeln!(o, "| {name} | {} | {} |", ratio(i.lower), ratio(i.upper));
        }
        o.push('\n');
    });
    warnings(&mut out, &dist.warnings);

    out.push_str("## 3. Variance and ramp-up\n\n");
    section(&mut out, &r.step3_variance, |o, v| {
        let _ = writeln!(o, "| Measure | Forecast | Benchmark |\n|---|---:|---:|");
        let _ = writeln!(
            o,
            "| Standard deviation | {} | {} |",
            percent_1dp(v.claimed_sd),
            fraction_pct(v.benchmark_sd)
        );
        let _ = writeln!(
            o,
            "| Shortfall at 95% confidence | {} | {} |",
            fraction_pct(v.claimed_q05_shortfall),
            fraction_pct(v.benchmark_q05_shortfall)
        );
        let _ = writeln!(
            o,
            "| Probability of shortfall of {} or more | {} | {} |",
            fraction_pct(v.s),
            fraction_pct(v.claimed_p_shortfall_s),
            fraction_pct(v.benchmark_p_shortfall_s)
        );
        let _ = writeln!(
            o,
            "\nRisk ratio (benchmark / forecast): {}.\n",
            v.display.get("risk_ratio").map_or("n/a", String::as_str)
        );
        warnings(o, &v.warnings);
    });
    section(&mut out, &r.step3_rampup, |o, ru| {
        o.push_str("| Year | Forecast | Benchmark | Projects | Overestimate |\n|---:|---:|---:|---:|---:|\n");
        for y in &ru.per_year {
            let _ = writeln!(
                o,
                "| {} | {} | {} | {} | {} |",
                y.year,
                percent(y.claimed_pct),
                percent(y.benchmark_pct),
                y.benchmark_projects,
                opt(y.overestimate_pct, percent)
            );
        }
        let _ = writeln!(
            o,
            "\nRise over the period: forecast {} pp, benchmark {} pp, ratio {} ({} projects).\n",
            value(ru.claimed_rise_pp),
            value(ru.benchmark_rise_pp),
            opt(ru.rise_ratio, ratio),
            ru.benchmark_n
        );
        warnings(o, &ru.warnings);
    });

    out.push_str("## 4. Forecaster track record\n\n");
    section(&mut out, &r.step4_track_record, |o, t| {
        if !t.projects.is_empty() {
            o.push_str("| Project | First year | Later year |\n|---|---:|---:|\n");
            for p in &t.projects {
                let later = match (p.later_year_overestimate_pct, p.later_year_index) {
                    (Some(v), Some(y)) => format!("{} (year {y})", percent(v)),
                    _ => String::from("n/a"),
                };
                let _ = writeln!(
                    o,
                    "| {} | {} | {later} |",
                    p.project_id,
                    opt(p.first_year_overestimate_pct, percent)
                );
            }
            let _ = writeln!(
                o,
                "| Average | {} | {} |\n",
                opt(t.mean_first_year_overestimate_pct, percent),
                opt(t.mean_later_year_overestimate_pct, percent)
            );
        }
        let _ = writeln!(o, "{}.\n", t.narrative);
    });

    out.push_str("## 5. Further risks\n\n");
    section(&mut out, &r.step5_risks, |o, rs| {
        if !rs.register.is_empty() {
            o.push_str("| Id | Risk | Direction | Weight |\n|---|---|---|---|\n");
            for e in &rs.register {
                let dir = match e.direction {
                    outsideview_core::diligence::RiskDirection::IncreasesRisk => "increases",
                    outsideview_core::diligence::RiskDirection::DecreasesRisk => "decreases",
                };
                let w = match e.weight {
                    outsideview_core::diligence::RiskWeight::Low => "low",
                    outsideview_core::diligence::RiskWeight::Medium => "medium",
                    outsideview_core::diligence::RiskWeight::High => "high",
                };
                let _ = writeln!(o, "| {} | {} | {dir} | {w} |", e.id, e.description);
            }
            o.push('\n');
        }
        let _ = writeln!(o, "{}.\n", rs.assessment.narrative);
    });

    out.push_str("## 6. Expected outcome\n\n");
    section(&mut out, &r.step6_outcome, |o, t| {
        let _ = writeln!(
            o,
            "| | Accuracy | {} |\n|---|---:|---:|\n| Expected outcome | {} | {} |",
            if t.unit.is_empty() {
                "Value"
            } else {
                t.unit.as_str()
            },
            ratio(t.expected_accuracy),
            value(t.expected_value)
        );
        for row in &t.rows {
            let _ = writeln!(
                o,
                "| {} interval | {}-{} | {}-{} |",
                level(row.level),
                ratio(row.accuracy.lower),
                ratio(row.accuracy.upper),
                value(row.value.lower),
                value(row.value.upper)
            );
        }
        let _ = writeln!(
            o,
            "\nForecast {} against expected {}.\n",
            value(t.forecast),
            value(t.expected_value)
        );
        if !t.adjusted.is_empty() {
            o.push_str(
                "| Certainty | Accuracy | Adjusted value | Adjustment |\n|---:|---:|---:|---:|\n",
            );
            for a in &t.adjusted {
                let _ = writeln!(
                    o,
                    "| {} | {} | {} | {} |",
                    level(a.level),
                    ratio(a.accuracy),
                    value(a.value),
                    percent(a.adjustment_pct)
                );
            }
            o.push('\n');
        }
        warnings(o, &t.warnings);
    });

    out.push_str("## 7. Forecaster comments\n\n");
    let c = &r.step7_comments;
    match &c.forecaster_response {
        Some(text) => {
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let _ = writeln!(out, "> {}", line.trim());
            }
            out.push('\n');
        }
        None => out.push_str("_No forecaster comments supplied._\n\n"),
    }
    match c.claims_contradicted {
        Some(true) => {
            out.push_str("Reviewer finding: the claims are contradicted by the data.\n\n")
        }
        Some(false) => out.push_str("Reviewer finding: no contradiction.\n\n"),
        None => {}
    }
    out.push_str("### By funding\n\n");
    section(&mut out, &c.by_funding, subgroups);
    out.push_str("### By category\n\n");
    section(&mut out, &c.by_category, subgroups);

    let k = &r.step8_conclusion;
    out.push_str("## 8. Conclusion\n\n| Flag | Raised | Detail |\n|---|---|---|\n");
    for f in &k.flags {
        let raised = match (f.assessed, f.triggered) {
            (false, _) => "not assessed",
            (true, true) => "yes",
            (true, false) => "no",
        };
        let _ = writeln!(
            out,
            "| {:?} {} | {raised} | {} |",
            f.code,
            f.code.title(),
            f.detail
        );
    }
    let _ = writeln!(out, "\n{}.", k.summary);
    out
}
