//! Report documents for classification results.

use serde_json::{json, Value};

use crate::io::{state_to_json, MatrixJson, MultiParamsJson, SepParamsJson};
use crate::pure::PureClassification;
use crate::sep::{form_both_directions, MultiClassification, SepClassification};
use crate::superop::{ConjFlag, SepForm};

fn flag_str(f: ConjFlag) -> &'static str {
    match f {
        ConjFlag::Linear => "linear",
        ConjFlag::ConjugateLinear => "conjugate",
    }
}

/// `{"kind","R","V","flag","witness","residual"}`; unused fields are `null`.
pub fn pure_report(c: &PureClassification) -> Value {
    let mut out = json!({
        "kind": c.kind(),
        "R": null,
        "V": null,
        "flag": null,
        "witness": null,
        "residual": c.residual(),
    });
    match c {
        PureClassification::TraceReplacer { r, .. } => out["R"] = json!(state_to_json(r)),
        PureClassification::Conjugation { u, .. } => {
            out["V"] = json!(MatrixJson::from_matrix(u.matrix()));
            out["flag"] = json!(flag_str(u.flag()));
        }
        PureClassification::NotPreserver { witness } => out["witness"] = json!(state_to_json(witness)),
    }
    out
}

fn pattern_family(form: &SepForm) -> Value {
    let family = match form {
        SepForm::Form8 { family, .. } | SepForm::Form9 { family, .. } => family,
        _ => return Value::Null,
    };
    family
        .iter()
        .map(|s| json!({"P": state_to_json(&s.p), "Q": state_to_json(&s.q), "image": state_to_json(&s.factor)}))
        .collect()
}

/// `{"form","params","witness","grid","residual","both_directions"}`.
pub fn sep_report(c: &SepClassification, dims: [usize; 2]) -> Value {
    match c {
        SepClassification::Form { form, grid, residual } => json!({
            "form": form.tag(),
            "params": SepParamsJson::from_form(form),
            "witness": null,
            "grid": grid.labels(),
            "residual": residual,
            "both_directions": form_both_directions(form, dims),
        }),
        SepClassification::Pattern89 { form, grid } => {
            let mut params = json!(SepParamsJson::from_form(form));
            params["family"] = pattern_family(form);
            json!({
                "form": form.tag(),
                "params": params,
                "witness": null,
                "grid": grid.labels(),
                "residual": null,
                "both_directions": false,
            })
        }
        SepClassification::NotPreserver { p, q } => json!({
            "form": "none",
            "params": null,
            "witness": [state_to_json(p), state_to_json(q)],
            "grid": null,
            "residual": null,
            "both_directions": false,
        }),
    }
}

/// Multipartite report; `"form"` is `"multi"`, `"none"` or `"insufficient"`.
pub fn multi_report(c: &MultiClassification) -> Value {
    match c {
        MultiClassification::Form { form, residual } => json!({
            "form": "multi",
            "params": MultiParamsJson::from_form(form),
            "witness": null,
            "residual": residual,
            "both_directions": form.isometries.iter().all(|u| u.is_square()),
        }),
        MultiClassification::NotPreserver { witness } => json!({
            "form": "none",
            "params": null,
            "witness": witness.iter().map(state_to_json).collect::<Vec<_>>(),
            "residual": null,
            "both_directions": false,
        }),
        MultiClassification::InsufficientRichness { slot } => json!({
            "form": "insufficient",
            "params": {"slot": slot},
            "witness": null,
            "residual": null,
            "both_directions": false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureState;
    use crate::sep::{ColCase, Grid, RowCase};
    use crate::superop::Isometry;

    #[test]
    fn sep_report_fields() {
        let form = SepForm::Form6 {
            u1: Isometry::identity(2, ConjFlag::ConjugateLinear),
            u2: Isometry::identity(2, ConjFlag::Linear),
        };
        let c = SepClassification::Form { form, grid: Grid { row: RowCase::C, col: ColCase::B }, residual: 0.0 };
        let r = sep_report(&c, [2, 2]);
        assert_eq!(r["form"], 6);
        assert_eq!(r["grid"], json!(["c", "b\u{2032}"]));
        assert_eq!(r["params"]["U1"]["flag"], "conjugate");
        assert_eq!(r["both_directions"], true);
    }

    #[test]
    fn pure_report_fields() {
        let c = PureClassification::NotPreserver { witness: PureState::basis(2, 1) };
        let r = pure_report(&c);
        assert_eq!(r["kind"], "not_preserver");
        assert_eq!(r["witness"], json!([[0.0, 0.0], [1.0, 0.0]]));
        assert!(r["residual"].is_null());
    }
}
