//! Plain-prefix robots.txt matcher.
//!
//! Groups are parsed per the de-facto format: consecutive `User-agent`
//! lines open a group, `Allow`/`Disallow` lines fill it, `Sitemap` lines
//! are global. Rule paths are matched as literal prefixes; `*` and `$`
//! carry no special meaning here. When rules overlap, the longest prefix
//! wins and ties go to Allow.

#[derive(Debug, Clone)]
struct Rule {
    allow: bool,
    prefix: String,
}

#[derive(Debug, Clone)]
struct Group {
    agents: Vec<String>,
    rules: Vec<Rule>,
}

#[derive(Debug, Clone, Default)]
pub struct RobotsRules {
    groups: Vec<Group>,
    sitemaps: Vec<String>,
}

pub fn parse_robots(text: &str) -> RobotsRules {
    let mut rules = RobotsRules::default();
    let mut agents: Vec<String> = Vec::new();
    let mut group_rules: Vec<Rule> = Vec::new();
    let mut in_rules = false;

    let mut flush = |agents: &mut Vec<String>, group_rules: &mut Vec<Rule>| {
        if !agents.is_empty() {
            rules.groups.push(Group {
                agents: std::mem::take(agents),
                rules: std::mem::take(group_rules),
            });
        } else {
            group_rules.clear();
        }
    };

    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((field, value)) = line.split_once(':') else {
            continue;
        };
        let field = field.trim().to_ascii_lowercase();
        let value = value.trim();
        match field.as_str() {
            "user-agent" => {
                if in_rules {
                    flush(&mut agents, &mut group_rules);
                    in_rules = false;
                }
                agents.push(value.to_ascii_lowercase());
            }
            "allow" | "disallow" => {
                in_rules = true;
                group_rules.push(Rule {
                    allow: field == "allow",
                    prefix: value.to_string(),
                });
            }
            "sitemap" => rules.sitemaps.push(value.to_string()),
            _ => {}
        }
    }
    flush(&mut agents, &mut group_rules);
    rules
}

impl RobotsRules {
    /// Sitemap URLs in declaration order, possibly relative.
    pub fn sitemaps(&self) -> &[String] {
        &self.sitemaps
    }

    /// Whether `path` may be fetched by the given agent. Specific
    /// user-agent groups shadow the `*` groups entirely when any match.
    pub fn is_allowed(&self, user_agent: &str, path: &str) -> bool {
        let token = user_agent
            .split('/')
            .next()
            .unwrap_or(user_agent)
            .trim()
            .to_ascii_lowercase();

        let specific: Vec<&Group> = self
            .groups
            .iter()
            .filter(|g| {
                g.agents
                    .iter()
                    .any(|a| a != "*" && !a.is_empty() && token.contains(a.as_str()))
            })
            .collect();
        let applicable: Vec<&Group> = if specific.is_empty() {
            self.groups
                .iter()
                .filter(|g| g.agents.iter().any(|a| a == "*"))
                .collect()
        } else {
            specific
        };

        let mut best_len = 0usize;
        let mut best_allow = true;
        for group in applicable {
            for rule in &group.rules {
                if rule.prefix.is_empty() {
                    // "Disallow:" with no value permits everything.
                    continue;
                }
                if path.starts_with(rule.prefix.as_str()) {
                    let len = rule.prefix.len();
                    if len > best_len || (len == best_len && rule.allow && !best_allow) {
                        best_len = len;
                        best_allow = rule.allow;
                    }
                }
            }
        }
        best_len == 0 || best_allow
    }
}
