def tool(fn):
    return fn


@tool
def temperature_convert(celsius):
    value = float(celsius)
    fahrenheit = value * 9 / 5 + 32
    kelvin = value + 273.15
    return {"celsius": value, "fahrenheit": round(fahrenheit, 2), "kelvin": round(kelvin, 2)}
