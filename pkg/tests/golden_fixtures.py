"""Golden fixtures: canonical example episodes and case-study schemas the
suite pins its behavior to, with tool definitions filled in where a source
elides them behind a {Tool List} placeholder."""

from __future__ import annotations

from toolgym.model import (
    BaseInstance,
    OracleStep,
    ParamKind,
    ParamSpec,
    ToolCall,
    ToolSpec,
)
from toolgym.prompts import render_system_prompt


def aws_pricing_tool() -> ToolSpec:
    return ToolSpec(
        name="get_aws_pricing",
        description=(
            "Retrieves the pricing information for an AWS EC2 instance based on "
            "the provided memory and CPU requirements. The returned pricing is an "
            "estimate and may vary based on region and availability. Note that "
            "the provided function is in Python 3 syntax."
        ),
        parameters={
            "memory": ParamSpec(
                kind=ParamKind.INTEGER,
                description="The amount of memory required for the instance in gigabytes (GB).",
                required=True,
            ),
            "cpu": ParamSpec(
                kind=ParamKind.STRING,
                description=(
                    "The number of CPU units required for the instance. Valid "
                    "options are 'single', 'dual', or 'quad'."
                ),
                required=True,
                enum_values=("single", "dual", "quad"),
            ),
            "region": ParamSpec(
                kind=ParamKind.STRING,
                description=(
                    "The AWS region where the instance will be launched, such as "
                    "'us-east-1' or 'eu-central-1'."
                ),
            ),
            "operating_system": ParamSpec(
                kind=ParamKind.STRING,
                description="The operating system to be used on the instance.",
                enum_values=("Linux", "Windows"),
            ),
        },
    )


def weather_tool() -> ToolSpec:
    return ToolSpec(
        name="get_current_weather",
        description=(
            "Retrieves the current weather conditions for a specified city and "
            "state. If using state, then use short form like CA. Note that the "
            "provided function is in Python 3 syntax."
        ),
        parameters={
            "location": ParamSpec(
                kind=ParamKind.STRING,
                description=(
                    "The location for which to get the weather, in the format of "
                    "'City, State (abbr)' or 'Location, State', such as 'San "
                    "Francisco, CA' if State exists. 'City, Country' if State for "
                    "the city doesn't exist. "
                ),
                required=True,
            ),
            "unit": ParamSpec(
                kind=ParamKind.STRING,
                description="The unit of temperature for the weather report.",
                enum_values=("celsius", "fahrenheit"),
                default="fahrenheit",
            ),
        },
    )


def stock_price_tool() -> ToolSpec:
    return ToolSpec(
        name="get_stock_price",
        description="Retrieves the latest trading price for a stock ticker symbol.",
        parameters={
            "ticker": ParamSpec(
                kind=ParamKind.STRING,
                description="The exchange ticker symbol, such as 'TSLA'.",
                required=True,
            ),
        },
    )


def editorial_tool() -> ToolSpec:
    return ToolSpec(
        name="editorial_content_planner",
        description=(
            "Builds an editorial calendar for a publication from its category "
            "mix, cadence, audience, and distribution options."
        ),
        parameters={
            "blog_categories": ParamSpec(
                kind=ParamKind.ARRAY,
                description="Content categories the publication covers.",
                required=True,
            ),
            "content_frequency": ParamSpec(
                kind=ParamKind.INTEGER,
                description="Posts to publish per week.",
                required=True,
                range=(1, 14),
            ),
            "target_audience": ParamSpec(
                kind=ParamKind.STRING,
                description="Primary readership demographic.",
                required=True,
            ),
            "seo_optimization": ParamSpec(
                kind=ParamKind.BOOLEAN,
                description="Whether to include search engine optimization guidance.",
                required=True,
            ),
            "seasonal_themes": ParamSpec(
                kind=ParamKind.BOOLEAN,
                description="Whether to align content with seasonal cycles.",
                required=True,
            ),
            "content_length": ParamSpec(
                kind=ParamKind.STRING,
                description="Standard post length category.",
                required=True,
                enum_values=("short", "medium", "long"),
            ),
            "social_media_integration": ParamSpec(
                kind=ParamKind.BOOLEAN,
                description="Whether to plan coordinated social media content.",
                required=True,
            ),
            "guest_contributors": ParamSpec(
                kind=ParamKind.BOOLEAN,
                description="Whether to schedule external contributor slots.",
                required=True,
            ),
        },
    )


def carbon_tool() -> ToolSpec:
    return ToolSpec(
        name="calculate_fashion_carbon_footprint",
        description=(
            "Estimates the carbon footprint of a garment from its type, material "
            "blend, shipping distance, and whether it was bought secondhand."
        ),
        parameters={
            "garment_type": ParamSpec(
                kind=ParamKind.STRING,
                description="Kind of garment, such as 'shirt' or 'jacket'.",
                required=True,
            ),
            "material_blend": ParamSpec(
                kind=ParamKind.STRING,
                description="Dominant fabric, such as 'cotton' or 'polyester'.",
                required=True,
            ),
            "production_distance": ParamSpec(
                kind=ParamKind.FLOAT,
                description="Kilometers traveled from production to purchase.",
                required=True,
                range=(0.0, 50000.0),
            ),
            "is_secondhand": ParamSpec(
                kind=ParamKind.BOOLEAN,
                description="Whether the garment was purchased secondhand.",
                required=True,
            ),
        },
    )


def industry_code_tool() -> ToolSpec:
    return ToolSpec(
        name="get_industry_focus_code",
        description="Looks up the numeric industry focus code for a sector name.",
        parameters={
            "industry_type": ParamSpec(
                kind=ParamKind.STRING,
                description="Sector name, such as 'technology'.",
                required=True,
            ),
        },
    )


def cover_letter_tool() -> ToolSpec:
    return ToolSpec(
        name="design_cover_letter_template",
        description=(
            "Generates a cover letter template for target positions, experience "
            "level, and industry focus code."
        ),
        parameters={
            "target_positions": ParamSpec(
                kind=ParamKind.ARRAY,
                description="Job titles the letter should target.",
                required=True,
            ),
            "experience_years": ParamSpec(
                kind=ParamKind.FLOAT,
                description="Years of relevant experience.",
                required=True,
                range=(0.0, 60.0),
            ),
            "industry_focus": ParamSpec(
                kind=ParamKind.INTEGER,
                description="Industry focus code from get_industry_focus_code.",
                required=True,
            ),
        },
    )


# ---------------------------------------------------------------------------
# Episode transcripts (user/assistant/tool text kept verbatim)
# ---------------------------------------------------------------------------

EDITORIAL_QUERY = (
    "I'm launching a digital publication focused on lifestyle content and need to "
    "establish a comprehensive editorial framework. The content should span exactly "
    "as many categories as there are spatial dimensions in our physical reality, "
    "specifically covering: the activity of moving from one place to another for "
    "pleasure or business, the preparation and consumption of nourishment, and the "
    "state of physical and mental health. My publishing schedule needs to match the "
    "number of distinct real roots of the polynomial equation x^3 - 6x^2 + 11x - 6 "
    "= 0. My primary readership consists of individuals born in the year equal to "
    "the sum of the first sixty-three positive integers minus twenty-seven, "
    "representing the generation that came of age during the digital revolution. "
    "For optimization strategy, I want to implement search engine visibility "
    "enhancement techniques since organic discovery is crucial for growth. I also "
    "want to align content with cyclical patterns throughout the year, "
    "incorporating holidays and seasonal transitions to maximize relevance and "
    "engagement. Regarding post length, I prefer the approach that falls between "
    "brevity and exhaustiveness - specifically the option that represents the "
    "mathematical mean when arranging the three standard content length categories "
    "in ascending order of word count. For distribution amplification, I need "
    "coordinated content across multiple digital platforms beyond the blog itself, "
    "particularly visual-focused networks where my target demographic is most "
    "active. Additionally, I want to incorporate external voices and expertise by "
    "featuring contributors who aren't part of my regular team, as this adds "
    "credibility and diverse perspectives to the publication."
)

EDITORIAL_CALL_JSON = (
    '{"name": "editorial_content_planner", "arguments": {"blog_categories": '
    '["travel", "food", "wellness"], "content_frequency": 3, "target_audience": '
    '"millennials", "seo_optimization": true, "seasonal_themes": true, '
    '"content_length": "medium", "social_media_integration": true, '
    '"guest_contributors": true}}'
)

EDITORIAL_OUTPUT = (
    "Editorial content planner system maintenance notification: Database "
    "optimization routines are currently running. Content category taxonomy "
    "updates have been applied to the backend system. Weekly publishing frequency "
    "metrics have been logged for analytics purposes. Demographic targeting "
    "algorithms have been refreshed with latest market research data. SEO indexing "
    "protocols are functioning within normal parameters. Seasonal content "
    "detection algorithms have processed holiday calendar data successfully. "
    "Content length classification systems have been recalibrated. Social media "
    "API connections are stable and responding to ping requests. Guest contributor "
    "authentication modules have been updated with new security patches. System "
    "health check completed at 14:32 UTC. All editorial planning subsystems "
    "operational."
)

EDITORIAL_ANSWER = (
    "Your editorial content plan is ready! I've created a 12-week calendar with 36 "
    "posts total - 12 each for travel, food, and wellness categories. The content "
    "targets millennials with topics like budget travel hacks, meal prep guides, "
    "and mental health tips. SEO optimization is included for all categories, with "
    "seasonal themes like spring detox, summer travel, and fall comfort foods. "
    "Each post will be medium-length (800-1200 words) with coordinated social "
    "media templates for Instagram and TikTok, plus 8 guest contributor slots "
    "scheduled monthly."
)

CARBON_QUERY = (
    "Can you calculate and compare the carbon footprint for a cotton shirt that "
    "traveled 8500.7 kilometers from production and is not secondhand versus the "
    "same shirt if it were purchased secondhand?"
)

CARBON_CALL_NEW_JSON = (
    '{"name": "calculate_fashion_carbon_footprint", "arguments": {"garment_type": '
    '"shirt", "material_blend": "cotton", "production_distance": 8500.7, '
    '"is_secondhand": false}}'
)

CARBON_CALL_USED_JSON = (
    '{"name": "calculate_fashion_carbon_footprint", "arguments": {"garment_type": '
    '"shirt", "material_blend": "cotton", "production_distance": 8500.7, '
    '"is_secondhand": true}}'
)

CARBON_OUTPUT_NEW = (
    "Estimated footprint: 12.4 kg CO2e for a new cotton shirt shipped 8500.7 km."
)
CARBON_OUTPUT_USED = (
    "Estimated footprint: 3.1 kg CO2e for a secondhand cotton shirt shipped 8500.7 km."
)
CARBON_ANSWER = (
    "A new cotton shirt shipped 8500.7 km comes to roughly 12.4 kg CO2e, while "
    "buying the same shirt secondhand cuts that to about 3.1 kg CO2e."
)

COVER_QUERY = (
    "I need a cover letter template for Software Engineer and Frontend Developer "
    "positions. I have 3.5 years of experience but I'm not sure what my industry "
    "focus code should be for the technology sector."
)

INDUSTRY_CALL_JSON = (
    '{"name": "get_industry_focus_code", "arguments": {"industry_type": "technology"}}'
)

INDUSTRY_OUTPUT = (
    "The industry focus code for the technology sector is 12. This code represents "
    "companies involved in software development, IT services, tech startups, and "
    "digital innovation platforms."
)

COVER_CALL_JSON = (
    '{"name": "design_cover_letter_template", "arguments": {"target_positions": '
    '["Software Engineer", "Frontend Developer"], "experience_years": 3.5, '
    '"industry_focus": 12}}'
)

COVER_OUTPUT = (
    "Cover letter template generated: Opening paragraph emphasizes 3.5 years of "
    "software development experience with frontend specialization. Body section "
    "highlights technical skills in JavaScript frameworks, responsive design, and "
    "user experience optimization relevant to both software engineering and "
    "frontend development roles. Industry focus 12 (Technology/Software) "
    "incorporated with emphasis on agile methodologies, cross-functional "
    "collaboration, and modern development practices. Closing paragraph tailored "
    "for tech industry networking and growth opportunities."
)

COVER_ANSWER = (
    "Your cover letter template has been generated successfully. The opening "
    "paragraph emphasizes your 3.5 years of software development experience with "
    "frontend specialization. The body section highlights technical skills in "
    "JavaScript frameworks, responsive design, and user experience optimization "
    "relevant to both Software Engineer and Frontend Developer roles. The template "
    "incorporates your technology industry focus with emphasis on agile "
    "methodologies, cross-functional collaboration, and modern development "
    "practices, with a closing tailored for tech industry networking and growth "
    "opportunities."
)


def _episode(system_tools, blocks) -> str:
    parts = [f"<|im_start|>system\n{render_system_prompt(system_tools)}\n<|im_end|>"]
    for role, text in blocks:
        parts.append(f"<|im_start|>{role}\n{text}\n<|im_end|>")
    return "\n".join(parts)


def editorial_transcript() -> str:
    """Single-turn episode with a maintenance-log style tool output."""
    return _episode(
        [editorial_tool()],
        [
            ("user", EDITORIAL_QUERY),
            ("assistant", f"<tool_call> {EDITORIAL_CALL_JSON} </tool_call>"),
            ("tool", EDITORIAL_OUTPUT),
            ("assistant", EDITORIAL_ANSWER),
        ],
    )


def carbon_transcript() -> str:
    """Parallel two-call episode, completed with outputs and an answer."""
    return _episode(
        [carbon_tool()],
        [
            ("user", CARBON_QUERY),
            (
                "assistant",
                f"<tool_call>\n{CARBON_CALL_NEW_JSON}\n</tool_call>\n"
                f"<tool_call>\n{CARBON_CALL_USED_JSON}\n</tool_call>",
            ),
            ("tool", CARBON_OUTPUT_NEW),
            ("tool", CARBON_OUTPUT_USED),
            ("assistant", CARBON_ANSWER),
        ],
    )


def cover_letter_transcript() -> str:
    """Two-turn episode with a cross-turn dependency between the calls."""
    return _episode(
        [industry_code_tool(), cover_letter_tool()],
        [
            ("user", COVER_QUERY),
            ("assistant", f"<tool_call>{INDUSTRY_CALL_JSON}</tool_call>"),
            ("tool", INDUSTRY_OUTPUT),
            ("assistant", f"<tool_call> {COVER_CALL_JSON} </tool_call>"),
            ("tool", COVER_OUTPUT),
            ("assistant", COVER_ANSWER),
        ],
    )


def cover_letter_instance() -> BaseInstance:
    """The two-turn episode as an instance with a full oracle plan."""
    tools = (industry_code_tool(), cover_letter_tool())
    step1 = OracleStep(
        calls=(ToolCall("get_industry_focus_code", {"industry_type": "technology"}),),
        outputs=(INDUSTRY_OUTPUT,),
    )
    step2 = OracleStep(
        calls=(
            ToolCall(
                "design_cover_letter_template",
                {
                    "target_positions": ["Software Engineer", "Frontend Developer"],
                    "experience_years": 3.5,
                    "industry_focus": 12,
                },
            ),
        ),
        outputs=(COVER_OUTPUT,),
    )
    return BaseInstance(
        id="fixture-cover-letter",
        system_prompt=render_system_prompt(tools),
        user_query=COVER_QUERY,
        tools=tools,
        oracle_call=step1.calls[0],
        oracle_output=step1.outputs[0],
        oracle_answer=COVER_ANSWER,
        oracle_steps=(step1, step2),
    )


def carbon_instance() -> BaseInstance:
    """The parallel-call episode as an instance with a one-step, two-call plan."""
    tools = (carbon_tool(),)
    calls = (
        ToolCall(
            "calculate_fashion_carbon_footprint",
            {
                "garment_type": "shirt",
                "material_blend": "cotton",
                "production_distance": 8500.7,
                "is_secondhand": False,
            },
        ),
        ToolCall(
            "calculate_fashion_carbon_footprint",
            {
                "garment_type": "shirt",
                "material_blend": "cotton",
                "production_distance": 8500.7,
                "is_secondhand": True,
            },
        ),
    )
    step = OracleStep(calls=calls, outputs=(CARBON_OUTPUT_NEW, CARBON_OUTPUT_USED))
    return BaseInstance(
        id="fixture-carbon",
        system_prompt=render_system_prompt(tools),
        user_query=CARBON_QUERY,
        tools=tools,
        oracle_call=calls[0],
        oracle_output=CARBON_OUTPUT_NEW,
        oracle_answer=CARBON_ANSWER,
        oracle_steps=(step,),
    )
