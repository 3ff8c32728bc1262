//! The `name:p1,p2,...` distribution grammar used on the command line.

use pelve_core::DistributionModel;

/// Parses `uniform:a,b`, `exp:rate`, `normal:m,sigma`, `pareto:k,alpha`,
/// `gpd:kappa,beta` or `excessgpd:u,kappa,beta,Fu`.
///
/// The output of `DistributionModel`'s `Display` parses back to the same
/// model.
pub fn parse_distribution(text: &str) -> Result<DistributionModel, String> {
    let (name, params) = text
        .split_once(':')
        .ok_or_else(|| format!("expected `name:params`, got `{text}`"))?;
    let values = params
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad parameter `{}` in `{text}`", p.trim()))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    let arity = match name {
        "exp" => 1,
        "uniform" | "normal" | "pareto" | "gpd" => 2,
        "excessgpd" => 4,
        _ => return Err(format!("unknown distribution `{name}`")),
    };
    if values.len() != arity {
        return Err(format!(
            "`{name}` takes {arity} parameter(s), got {}",
            values.len()
        ));
    }
    let v = &values;
    let model = match name {
        "uniform" => DistributionModel::uniform(v[0], v[1]),
        "exp" => DistributionModel::exponential(v[0]),
        "normal" => DistributionModel::normal(v[0], v[1]),
        "pareto" => DistributionModel::pareto(v[0], v[1]),
        "gpd" => DistributionModel::generalized_pareto(v[0], v[1]),
        _ => DistributionModel::excess_gpd(v[0], v[1], v[2], v[3]),
    };
    model.map_err(|e| e.to_string())
}
