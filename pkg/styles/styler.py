# colors
GREEN_500 = '#3ecf8e'
BLUE_500 = '#0F7DA0'
GREY_500 = '#757575'
BLACK_300 = '#424242'


def page_css():
    return f"""
    [data-testid="stMetricValue"] {{ color: {GREEN_500}; }}
    [data-testid="stCaptionContainer"] {{ color: {GREY_500}; }}
    [data-testid="stExpander"] details {{ border-color: {BLACK_300}; }}
    .stDownloadButton button {{ border-color: {BLUE_500}; }}
    """
